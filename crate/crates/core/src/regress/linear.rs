//! Linear smoothers and the affine dependence of augmented fits on `y'`.

use nalgebra::DMatrix;

use super::RegressorSpec;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg;

/// Coefficients of the augmented-fit predictions `ŷ'_i = a_i y' + b_i`,
/// `i = 1..=n+1`, the last entry belonging to the new covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Backends whose fitted values are a fixed matrix applied to the
/// (possibly clipped) training outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum LinearKind {
    Ols { intercept_only: bool },
    Krr { gamma: f64, lambda: f64 },
    Smoother { bandwidth: f64, lo: f64, hi: f64 },
}

impl LinearKind {
    pub fn of(spec: &RegressorSpec) -> Option<Self> {
        match *spec {
            RegressorSpec::Ols { intercept_only } => Some(LinearKind::Ols { intercept_only }),
            RegressorSpec::Krr { gamma, lambda } => Some(LinearKind::Krr { gamma, lambda }),
            RegressorSpec::KernelSmoother {
                bandwidth,
                trim_lo,
                trim_hi,
            } => Some(LinearKind::Smoother {
                bandwidth,
                lo: trim_lo,
                hi: trim_hi,
            }),
            _ => None,
        }
    }

    pub fn has_leverage(&self) -> bool {
        !matches!(self, LinearKind::Smoother { .. })
    }

    /// Clip range applied to outcomes before smoothing, when active.
    pub fn clip(&self) -> Option<(f64, f64)> {
        match *self {
            LinearKind::Smoother { lo, hi, .. } if lo.is_finite() || hi.is_finite() => Some((lo, hi)),
            _ => None,
        }
    }

    pub fn target(&self, y: f64) -> f64 {
        match *self {
            LinearKind::Smoother { lo, hi, .. } => y.clamp(lo, hi),
            _ => y,
        }
    }

    /// Matrix mapping the outcomes of the `train` rows to predictions at
    /// every row of `rows`.
    pub fn prediction_matrix(&self, rows: &[&[f64]], train: &[usize]) -> Result<DMatrix<f64>> {
        let train_rows: Vec<&[f64]> = train.iter().map(|&i| rows[i]).collect();
        match *self {
            LinearKind::Ols { intercept_only } => {
                let x_all = linalg::design(rows, intercept_only);
                let x_train = linalg::design(&train_rows, intercept_only);
                let chol = linalg::gram_factor(&x_train)?;
                Ok(x_all * chol.solve(&x_train.transpose()))
            }
            LinearKind::Krr { gamma, lambda } => {
                let mut k = linalg::kernel_matrix(&train_rows, &train_rows, gamma);
                for i in 0..train.len() {
                    k[(i, i)] += lambda;
                }
                let chol = linalg::cholesky(k)?;
                let cross = linalg::kernel_matrix(&train_rows, rows, gamma);
                Ok(chol.solve(&cross).transpose())
            }
            LinearKind::Smoother { bandwidth, .. } => {
                let mut w = linalg::kernel_matrix(rows, &train_rows, bandwidth);
                for mut row in w.row_iter_mut() {
                    let s = row.sum();
                    row /= s;
                }
                Ok(w)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct AffineResponse {
    pub coeffs: LinearCoefficients,
    /// Predictions depend on `y'` through `clamp(y', lo, hi)` when set.
    pub clip: Option<(f64, f64)>,
    /// Diagonal of the augmented hat matrix, for backends that have one.
    pub leverage: Option<Vec<f64>>,
}

impl AffineResponse {
    pub fn n(&self) -> usize {
        self.coeffs.a.len() - 1
    }

    /// Slope and offset of `ŷ'_{n+1} - ŷ'_i` in the clipped candidate.
    pub fn difference(&self, i: usize) -> (f64, f64) {
        let (a, b) = (&self.coeffs.a, &self.coeffs.b);
        let n = self.n();
        (a[n] - a[i], b[n] - b[i])
    }

    pub fn clipped(&self, y_prime: f64) -> f64 {
        match self.clip {
            Some((lo, hi)) => y_prime.clamp(lo, hi),
            None => y_prime,
        }
    }
}

pub(crate) fn affine_response(
    spec: &RegressorSpec,
    data: &Dataset,
    x_new: &[f64],
) -> Result<AffineResponse> {
    spec.validate()?;
    data.check_covariate(x_new)?;
    let kind = LinearKind::of(spec).ok_or_else(|| {
        Error::Capability(format!("{spec:?} predictions are not linear in the outcomes"))
    })?;
    let n = data.len();
    let mut rows: Vec<&[f64]> = data.xs().collect();
    rows.push(x_new);
    let all: Vec<usize> = (0..=n).collect();
    let p = kind.prediction_matrix(&rows, &all)?;
    let targets: Vec<f64> = data.ys().iter().map(|&y| kind.target(y)).collect();
    let a = (0..=n).map(|i| p[(i, n)]).collect();
    let b = (0..=n)
        .map(|i| (0..n).map(|j| p[(i, j)] * targets[j]).sum())
        .collect();
    let leverage = kind
        .has_leverage()
        .then(|| (0..=n).map(|i| p[(i, i)]).collect());
    Ok(AffineResponse {
        coeffs: LinearCoefficients { a, b },
        clip: kind.clip(),
        leverage,
    })
}

/// Coefficients `a_i = ∂ŷ'_i/∂y'` and `b_i = ŷ'_i(0)` of the fit on the
/// training data augmented with `(x_new, y')`.
pub fn linear_coefficients(
    spec: &RegressorSpec,
    data: &Dataset,
    x_new: &[f64],
) -> Result<LinearCoefficients> {
    let resp = affine_response(spec, data, x_new)?;
    if resp.clip.is_some() {
        return Err(Error::Capability(
            "clipped smoother is not linear in the candidate outcome".into(),
        ));
    }
    Ok(resp.coeffs)
}
