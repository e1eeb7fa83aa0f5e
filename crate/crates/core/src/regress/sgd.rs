//! Linear quantile regression by one-sample sub-gradient descent.

use super::{FittedRegressor, Model};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// `η_t = η`.
    Constant(f64),
    /// `η_t = c / √t`.
    InvSqrt(f64),
}

impl StepSchedule {
    /// Step size for the `t`-th update of a pass, `t ≥ 1`.
    pub fn eta(&self, t: usize) -> f64 {
        match *self {
            StepSchedule::Constant(eta) => eta,
            StepSchedule::InvSqrt(c) => c / (t as f64).sqrt(),
        }
    }

    /// `c / √t` with `c` half the sample standard deviation of `ys`
    /// (falling back to 0.5 when the spread is zero or undefined).
    pub fn default_for(ys: &[f64]) -> Self {
        let n = ys.len() as f64;
        let sd = if ys.len() < 2 {
            0.0
        } else {
            let mean = ys.iter().sum::<f64>() / n;
            (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        StepSchedule::InvSqrt(if sd > 0.0 && sd.is_finite() { 0.5 * sd } else { 0.5 })
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            StepSchedule::Constant(v) | StepSchedule::InvSqrt(v) => v,
        };
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::invalid("step size", v, "must be finite and nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdConfig {
    pub tau: f64,
    pub schedule: StepSchedule,
    /// Independent passes from `β = 0`, each over its own ordering; the
    /// fitted parameter is their average.
    pub n_passes: usize,
    pub seed: u64,
}

impl SgdConfig {
    pub fn new(tau: f64, schedule: StepSchedule, n_passes: usize, seed: u64) -> Self {
        SgdConfig {
            tau,
            schedule,
            n_passes,
            seed,
        }
    }

    /// Ten passes with the default schedule for `ys`.
    pub fn default_for(ys: &[f64], tau: f64, seed: u64) -> Self {
        Self::new(tau, StepSchedule::default_for(ys), 10, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::invalid("tau", self.tau, "must lie in (0, 1)"));
        }
        if self.n_passes == 0 {
            return Err(Error::invalid("n_passes", 0, "at least one pass is required"));
        }
        self.schedule.validate()
    }
}

pub(crate) fn with_intercept(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.push(1.0);
    v
}

/// Visiting order of pass `pass` over `m` samples. It depends only on the
/// seed and the sample count, never on the outcomes.
pub(crate) fn pass_order(seed: u64, pass: usize, m: usize) -> Vec<usize> {
    let mut rng = SimRng::with_stream(&[seed, m as u64], pass as u64);
    let mut order: Vec<usize> = (0..m).collect();
    rng.shuffle(&mut order);
    order
}

/// `β ← β − η (τ − 1{y > βᵀx}) x` with the indicator supplied by the caller.
pub(crate) fn sgd_update(beta: &mut [f64], x: &[f64], above: bool, tau: f64, eta: f64) {
    let g = tau - if above { 1.0 } else { 0.0 };
    for (b, v) in beta.iter_mut().zip(x) {
        *b -= eta * g * v;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub fn fit_quantile_sgd(data: &Dataset, cfg: &SgdConfig) -> Result<FittedRegressor> {
    cfg.validate()?;
    let rows: Vec<Vec<f64>> = data.xs().map(with_intercept).collect();
    let p = data.dim() + 1;
    let mut avg = vec![0.0; p];
    for pass in 0..cfg.n_passes {
        let mut beta = vec![0.0; p];
        for (t, &i) in pass_order(cfg.seed, pass, data.len()).iter().enumerate() {
            let above = data.y(i) > dot(&beta, &rows[i]);
            sgd_update(&mut beta, &rows[i], above, cfg.tau, cfg.schedule.eta(t + 1));
        }
        for (a, b) in avg.iter_mut().zip(&beta) {
            *a += b;
        }
    }
    for a in &mut avg {
        *a /= cfg.n_passes as f64;
    }
    Ok(FittedRegressor::new(
        Model::Linear {
            coef: avg,
            intercept_only: false,
        },
        data,
        None,
    ))
}
