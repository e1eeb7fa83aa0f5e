use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regress::{affine_response, RegressorSpec};
use crate::stepfn::{PredictiveSystem, StepFn};

/// Conformity measure: the augmented-fit residual, optionally divided by
/// `√(1 − h)` with `h` the leverage of the sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConformityKind {
    Plain,
    Studentised,
}

/// Score divisors `√(1 − h_i)` (or ones) for the `n + 1` augmented samples.
pub(crate) fn divisors(kind: ConformityKind, leverage: Option<&[f64]>, m: usize) -> Result<Vec<f64>> {
    match kind {
        ConformityKind::Plain => Ok(vec![1.0; m]),
        ConformityKind::Studentised => {
            let h = leverage.ok_or_else(|| Error::Capability("studentised scores need leverages".into()))?;
            h.iter()
                .enumerate()
                .map(|(index, &leverage)| {
                    if leverage >= 1.0 {
                        Err(Error::LeverageOne { index, leverage })
                    } else {
                        Ok((1.0 - leverage).sqrt())
                    }
                })
                .collect()
        }
    }
}

/// Conformal predictive system of a linear smoother: the lower bound counts
/// training scores strictly below the score of `(x_new, y)`, the upper
/// bound those at most equal plus one. Fails with [`Error::NotMonotone`]
/// when the measure is not monotone for these data.
pub fn full_cps(data: &Dataset, spec: &RegressorSpec, kind: ConformityKind, x_new: &[f64]) -> Result<PredictiveSystem> {
    let resp = affine_response(spec, data, x_new)?;
    if resp.clip.is_some() {
        return Err(Error::Capability("clipped smoother is not linear in the candidate outcome".into()));
    }
    let n = data.len();
    let (a, b) = (&resp.coeffs.a, &resp.coeffs.b);
    let sigma = divisors(kind, resp.leverage.as_deref(), n + 1)?;
    // A_new(y) - A_i(y) = slope_i * y + offset_i
    let mut lower_base = 0i64;
    let mut upper_base = 1i64;
    let mut jumps = Vec::with_capacity(n);
    for i in 0..n {
        let slope = (1.0 - a[n]) / sigma[n] + a[i] / sigma[i];
        let offset = -b[n] / sigma[n] - (data.y(i) - b[i]) / sigma[i];
        if slope == 0.0 {
            lower_base += (offset > 0.0) as i64;
            upper_base += (offset >= 0.0) as i64;
        } else {
            let at = -offset / slope;
            if slope > 0.0 {
                jumps.push((at, 1));
            } else {
                lower_base += 1;
                upper_base += 1;
                jumps.push((at, -1));
            }
        }
    }
    let d = (n + 1) as u32;
    let lower = StepFn::from_jumps(lower_base, jumps.clone(), d)?;
    let upper = StepFn::from_jumps(upper_base, jumps, d)?;
    PredictiveSystem::new(lower, upper)
}
