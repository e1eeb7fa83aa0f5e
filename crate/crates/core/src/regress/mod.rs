//! Point-prediction backends.
//!
//! Each backend fits a [`FittedRegressor`]. The backends whose predictions
//! are linear in the training outcomes (least squares, kernel ridge, kernel
//! smoother) also expose their smoother matrices, which the full-conformal
//! machinery uses to express augmented fits as affine functions of the
//! candidate outcome.

mod cv;
mod deleted;
mod kernel;
mod linear;
mod ols;
mod sgd;
mod smoother;

use nalgebra::DMatrix;

pub use cv::{cross_validate_lambda, fold_assignment};
pub use deleted::{deleted_fit, trim_count};
pub(crate) use deleted::survivors as deleted_survivors;
pub use kernel::{fit_krr, median_pairwise_distance};
pub use linear::{linear_coefficients, LinearCoefficients};
pub use ols::fit_ols;
pub use sgd::{fit_quantile_sgd, SgdConfig, StepSchedule};
pub use smoother::fit_kernel_smoother;

pub(crate) use linear::{affine_response, AffineResponse, LinearKind};
pub(crate) use sgd::{pass_order, sgd_update, with_intercept};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum RegressorSpec {
    /// Least squares with an intercept appended to the covariates, or the
    /// intercept alone.
    Ols { intercept_only: bool },
    /// Kernel ridge regression with the Laplacian kernel `exp(-‖x - x'‖ / gamma)`.
    Krr { gamma: f64, lambda: f64 },
    QuantileSgd(SgdConfig),
    /// Kernel-weighted average of outcomes clipped to `[trim_lo, trim_hi]`;
    /// infinite thresholds disable clipping.
    KernelSmoother {
        bandwidth: f64,
        trim_lo: f64,
        trim_hi: f64,
    },
    /// Fit `inner`, drop the largest absolute residuals, refit.
    Deleted {
        inner: Box<RegressorSpec>,
        trim_fraction: f64,
    },
}

impl RegressorSpec {
    pub fn ols() -> Self {
        RegressorSpec::Ols {
            intercept_only: false,
        }
    }

    pub fn smoother(bandwidth: f64) -> Self {
        RegressorSpec::KernelSmoother {
            bandwidth,
            trim_lo: f64::NEG_INFINITY,
            trim_hi: f64::INFINITY,
        }
    }

    pub fn deleted(inner: RegressorSpec, trim_fraction: f64) -> Self {
        RegressorSpec::Deleted {
            inner: Box::new(inner),
            trim_fraction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RegressorSpec::Ols { .. } => Ok(()),
            RegressorSpec::Krr { gamma, lambda } => {
                if !(*gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::invalid("gamma", gamma, "must be positive"));
                }
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::invalid("lambda", lambda, "must be positive"));
                }
                Ok(())
            }
            RegressorSpec::QuantileSgd(cfg) => cfg.validate(),
            RegressorSpec::KernelSmoother {
                bandwidth,
                trim_lo,
                trim_hi,
            } => {
                if !(*bandwidth > 0.0 && bandwidth.is_finite()) {
                    return Err(Error::invalid("bandwidth", bandwidth, "must be positive"));
                }
                if trim_lo.is_nan() || trim_hi.is_nan() || trim_lo > trim_hi {
                    return Err(Error::invalid(
                        "trim",
                        format!("[{trim_lo}, {trim_hi}]"),
                        "lower threshold must not exceed upper",
                    ));
                }
                Ok(())
            }
            RegressorSpec::Deleted {
                inner,
                trim_fraction,
            } => {
                if matches!(**inner, RegressorSpec::Deleted { .. }) {
                    return Err(Error::invalid("inner", "Deleted", "deletion cannot be nested"));
                }
                if !(0.0..1.0).contains(trim_fraction) {
                    return Err(Error::invalid("trim_fraction", trim_fraction, "must lie in [0, 1)"));
                }
                inner.validate()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Model {
    Linear {
        coef: Vec<f64>,
        intercept_only: bool,
    },
    Kernel {
        centers: Dataset,
        weights: Vec<f64>,
        gamma: f64,
    },
    Smoother {
        centers: Dataset,
        targets: Vec<f64>,
        bandwidth: f64,
    },
}

impl Model {
    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Model::Linear {
                coef,
                intercept_only: true,
            } => coef[0],
            Model::Linear { coef, .. } => {
                let (slope, intercept) = coef.split_at(coef.len() - 1);
                slope.iter().zip(x).map(|(b, v)| b * v).sum::<f64>() + intercept[0]
            }
            Model::Kernel {
                centers,
                weights,
                gamma,
            } => centers
                .xs()
                .zip(weights)
                .map(|(c, w)| w * crate::linalg::laplacian_kernel(x, c, *gamma))
                .sum(),
            Model::Smoother {
                centers,
                targets,
                bandwidth,
            } => {
                let (num, den) = centers.xs().zip(targets).fold((0.0, 0.0), |(n, d), (c, t)| {
                    let w = crate::linalg::laplacian_kernel(x, c, *bandwidth);
                    (n + w * t, d + w)
                });
                num / den
            }
        }
    }
}

/// A fitted point predictor together with its in-sample residuals.
#[derive(Debug, Clone)]
pub struct FittedRegressor {
    model: Model,
    fitted: Vec<f64>,
    residuals: Vec<f64>,
    smoother: Option<(LinearKind, Dataset)>,
}

impl FittedRegressor {
    /// Fitted values and residuals are computed through `predict` so that
    /// `residual_i = y_i - predict(x_i)` holds exactly.
    pub(crate) fn new(model: Model, data: &Dataset, smoother: Option<LinearKind>) -> Self {
        let fitted: Vec<f64> = data.xs().map(|x| model.predict(x)).collect();
        let residuals = data.ys().iter().zip(&fitted).map(|(y, f)| y - f).collect();
        FittedRegressor {
            model,
            fitted,
            residuals,
            smoother: smoother.map(|k| (k, data.clone())),
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.model.predict(x)
    }

    pub fn fitted(&self) -> &[f64] {
        &self.fitted
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub(crate) fn model(&self) -> &Model {
        &self.model
    }

    /// Hat matrix `H` with `fitted = H y` (least squares), or the smoother
    /// matrix `K (K + λI)⁻¹` (kernel ridge). `None` for other backends.
    pub fn hat_matrix(&self) -> Option<DMatrix<f64>> {
        let (kind, data) = self.smoother.as_ref()?;
        if !kind.has_leverage() {
            return None;
        }
        let rows: Vec<&[f64]> = data.xs().collect();
        let all: Vec<usize> = (0..rows.len()).collect();
        kind.prediction_matrix(&rows, &all).ok()
    }

    pub fn leverage(&self) -> Option<Vec<f64>> {
        self.hat_matrix().map(|h| h.diagonal().iter().copied().collect())
    }
}

pub fn fit(spec: &RegressorSpec, data: &Dataset) -> Result<FittedRegressor> {
    spec.validate()?;
    match spec {
        RegressorSpec::Ols { intercept_only } => fit_ols(data, *intercept_only),
        RegressorSpec::Krr { gamma, lambda } => fit_krr(data, *gamma, *lambda),
        RegressorSpec::QuantileSgd(cfg) => fit_quantile_sgd(data, cfg),
        RegressorSpec::KernelSmoother {
            bandwidth,
            trim_lo,
            trim_hi,
        } => fit_kernel_smoother(data, *bandwidth, *trim_lo, *trim_hi),
        RegressorSpec::Deleted {
            inner,
            trim_fraction,
        } => deleted_fit(data, inner, *trim_fraction),
    }
}
