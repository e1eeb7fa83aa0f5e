use super::cps::{divisors, ConformityKind};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regress::{fit, RegressorSpec};

/// A decrease of `A(new) - A(i)` between consecutive grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub index: usize,
    pub y_from: f64,
    pub y_to: f64,
    pub decrease: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonotonicityReport {
    pub violations: Vec<Violation>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scans `differences(y)` (one entry per training sample) along the grid.
pub(crate) fn scan_differences<F>(grid: &[f64], differences: F) -> Result<MonotonicityReport>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    if grid.is_empty() {
        return Err(Error::Empty("y grid"));
    }
    let mut report = MonotonicityReport::default();
    let mut prev = differences(grid[0])?;
    for w in grid.windows(2) {
        let cur = differences(w[1])?;
        for (index, (p, c)) in prev.iter().zip(&cur).enumerate() {
            let drop = p - c;
            if drop > 1e-9 * (1.0 + p.abs().max(c.abs())) {
                report.violations.push(Violation {
                    index,
                    y_from: w[0],
                    y_to: w[1],
                    decrease: drop,
                });
            }
        }
        prev = cur;
    }
    Ok(report)
}

/// Refits on the augmented data at every grid point and reports where the
/// score difference between the new sample and a training sample decreases.
pub fn monotonicity_check(
    data: &Dataset,
    spec: &RegressorSpec,
    kind: ConformityKind,
    x_new: &[f64],
    y_grid: &[f64],
) -> Result<MonotonicityReport> {
    data.check_covariate(x_new)?;
    let n = data.len();
    scan_differences(y_grid, |y| {
        let f = fit(spec, &data.augmented(x_new, y))?;
        let h = f.leverage();
        let sigma = divisors(kind, h.as_deref(), n + 1)?;
        let r = f.residuals();
        let new = r[n] / sigma[n];
        Ok((0..n).map(|i| new - r[i] / sigma[i]).collect())
    })
}
