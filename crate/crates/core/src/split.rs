//! Split-conformal predictive systems: the regressor is fitted on an
//! estimation prefix and residuals are calibrated on the remainder.

use crate::data::{Dataset, SplitIndex};
use crate::error::{Error, Result};
use crate::regress::{fit, FittedRegressor, RegressorSpec};
use crate::stepfn::{ecdf, ForecastDistribution, PredictiveSystem, StepFn};

/// Floor applied to companion scale predictions.
pub const SCALE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleSource {
    /// The same regressor kind fitted to the absolute estimation residuals.
    Companion,
    /// `σ̂_x = c` for every `x`.
    Constant(f64),
}

/// Increasing residual map `f_x`: the identity, or division by `σ̂_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResidualTransform {
    Identity,
    Scale(ScaleSource),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    pub split: SplitIndex,
    pub spec: RegressorSpec,
    pub transform: ResidualTransform,
}

impl SplitConfig {
    pub fn new(split: SplitIndex, spec: RegressorSpec, transform: ResidualTransform) -> Self {
        SplitConfig {
            split,
            spec,
            transform,
        }
    }
}

/// Fitted residual transform.
#[derive(Debug, Clone)]
pub(crate) enum Scale {
    Unit,
    Constant(f64),
    Fitted(FittedRegressor),
}

impl Scale {
    pub fn build(transform: ResidualTransform, spec: &RegressorSpec, est: &Dataset, fitted: &FittedRegressor) -> Result<Self> {
        match transform {
            ResidualTransform::Identity => Ok(Scale::Unit),
            ResidualTransform::Scale(ScaleSource::Constant(c)) => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::invalid("scale", c, "must be positive and finite"));
                }
                Ok(Scale::Constant(c))
            }
            ResidualTransform::Scale(ScaleSource::Companion) => {
                let abs: Vec<f64> = fitted.residuals().iter().map(|e| e.abs()).collect();
                Ok(Scale::Fitted(fit(spec, &est.with_outcomes(abs)?)?))
            }
        }
    }

    pub fn at(&self, x: &[f64]) -> f64 {
        match self {
            Scale::Unit => 1.0,
            Scale::Constant(c) => *c,
            Scale::Fitted(f) => f.predict(x).max(SCALE_FLOOR),
        }
    }
}

/// Everything the split constructions share: calibration scores
/// `f_i(ε_i)` and the prediction and scale at the new covariate.
struct Calibrated {
    scores: Vec<f64>,
    y_hat: f64,
    sigma: f64,
}

impl Calibrated {
    fn new(data: &Dataset, cfg: &SplitConfig, x_new: &[f64]) -> Result<Self> {
        data.check_covariate(x_new)?;
        let (est, cal) = data.split(cfg.split)?;
        let fitted = fit(&cfg.spec, &est)?;
        let scale = Scale::build(cfg.transform, &cfg.spec, &est, &fitted)?;
        let scores = cal
            .xs()
            .zip(cal.ys())
            .map(|(x, y)| (y - fitted.predict(x)) / scale.at(x))
            .collect();
        Ok(Calibrated {
            scores,
            y_hat: fitted.predict(x_new),
            sigma: scale.at(x_new),
        })
    }

    /// `ŷ_new + f_new⁻¹(f_i(ε_i))`.
    fn atoms(&self) -> Vec<f64> {
        self.scores.iter().map(|s| self.y_hat + self.sigma * s).collect()
    }

    fn denom(&self) -> u32 {
        self.scores.len() as u32 + 1
    }
}

/// Residual-distribution forecast built from the calibration residuals.
pub fn split_forecast(data: &Dataset, cfg: &SplitConfig, x_new: &[f64]) -> Result<ForecastDistribution> {
    ecdf(&Calibrated::new(data, cfg, x_new)?.atoms())
}

/// Predictive system of the split residual-distribution forecast; thickness
/// is exactly one over the calibration size plus one.
pub fn split_system(data: &Dataset, cfg: &SplitConfig, x_new: &[f64]) -> Result<PredictiveSystem> {
    let c = Calibrated::new(data, cfg, x_new)?;
    let atoms = c.atoms();
    PredictiveSystem::new(
        StepFn::counting(&atoms, 0, c.denom())?,
        StepFn::counting(&atoms, 1, c.denom())?,
    )
}

/// The same system assembled from conformity scores: the bounds count
/// calibration scores strictly below (lower) or at most (upper, plus one)
/// the score `A(x_new, y)` of each candidate outcome.
pub fn split_cps_via_conformity(data: &Dataset, cfg: &SplitConfig, x_new: &[f64]) -> Result<PredictiveSystem> {
    let c = Calibrated::new(data, cfg, x_new)?;
    let score = |y: f64| (y - c.y_hat) / c.sigma;
    // y where A(x_new, y) meets some calibration score
    let mut cuts: Vec<f64> = c.scores.iter().map(|a| c.y_hat + c.sigma * a).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let m = c.scores.len() as u32;
    let count = |y: f64, strict: bool| -> u32 {
        let s = score(y);
        c.scores
            .iter()
            .filter(|&&a| if strict { a < s } else { a <= s })
            .count() as u32
    };
    let mut lower = vec![0];
    let mut upper = vec![1];
    for (k, &b) in cuts.iter().enumerate() {
        match cuts.get(k + 1) {
            Some(&next) => {
                let mid = 0.5 * (b + next);
                lower.push(count(mid, true));
                upper.push(1 + count(mid, false));
            }
            None => {
                lower.push(m);
                upper.push(m + 1);
            }
        }
    }
    PredictiveSystem::new(
        StepFn::new(cuts.clone(), lower, m + 1)?,
        StepFn::new(cuts, upper, m + 1)?,
    )
}
