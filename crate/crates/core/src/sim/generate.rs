use crate::data::{Dataset, Sample};
use crate::error::Result;
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SettingKind {
    /// `X ~ N(0, 1)`, `Y ~ N(X, 1)`.
    Linear,
    /// `X ~ U(0, 10)`, `Y = 2X + 5 sin X + N(0, (X/5)²)`.
    Nonlinear,
}

impl SettingKind {
    pub fn name(&self) -> &'static str {
        match self {
            SettingKind::Linear => "linear",
            SettingKind::Nonlinear => "nonlinear",
        }
    }
}

impl std::str::FromStr for SettingKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "linear" => Ok(SettingKind::Linear),
            "nonlinear" => Ok(SettingKind::Nonlinear),
            other => Err(format!("unknown setting `{other}` (expected linear or nonlinear)")),
        }
    }
}

fn draw(kind: SettingKind, rng: &mut SimRng) -> (f64, f64) {
    match kind {
        SettingKind::Linear => {
            let x = rng.standard_normal();
            (x, x + rng.standard_normal())
        }
        SettingKind::Nonlinear => {
            let x = 10.0 * rng.uniform();
            let sd = x / 5.0;
            (x, 2.0 * x + 5.0 * x.sin() + sd * rng.standard_normal())
        }
    }
}

/// `n` training pairs and one held-out pair, drawn in that order.
pub fn generate(kind: SettingKind, n: usize, rng: &mut SimRng) -> Result<(Dataset, Sample)> {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, b) = draw(kind, rng);
        x.push(a);
        y.push(b);
    }
    let (hx, hy) = draw(kind, rng);
    Ok((Dataset::univariate(&x, &y)?, Sample::new(vec![hx], hy)))
}

pub fn gen_linear(n: usize, seed: u64) -> Result<(Dataset, Sample)> {
    generate(SettingKind::Linear, n, &mut SimRng::new(&[seed]))
}

pub fn gen_nonlinear(n: usize, seed: u64) -> Result<(Dataset, Sample)> {
    generate(SettingKind::Nonlinear, n, &mut SimRng::new(&[seed]))
}
