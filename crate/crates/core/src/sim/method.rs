use crate::data::{Dataset, SplitIndex};
use crate::error::{Error, Result};
use crate::full::{full_cps, full_rdps, full_rdps_deleted, quantile_sgd_full_rdps, ConformityKind, FullStrategy};
use crate::regress::{cross_validate_lambda, median_pairwise_distance, RegressorSpec, SgdConfig};
use crate::split::{split_cps_via_conformity, split_system, ResidualTransform, SplitConfig};
use crate::stepfn::PredictiveSystem;

/// Candidate ridge penalties for cross-validation.
pub const LAMBDA_GRID: [f64; 6] = [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0];
pub const CV_FOLDS: usize = 5;

/// Point predictor whose hyperparameters may depend on the replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    Ols,
    /// Bandwidth by the median heuristic, penalty by cross-validation.
    Krr,
    Smoother { bandwidth: f64 },
}

impl Backend {
    /// Fixes hyperparameters from the training data and, for the ridge
    /// penalty, an independent sample.
    pub fn resolve(&self, data: &Dataset, cv: &Dataset, cv_seed: u64) -> Result<RegressorSpec> {
        match *self {
            Backend::Ols => Ok(RegressorSpec::ols()),
            Backend::Krr => {
                let gamma = median_pairwise_distance(data)?;
                let lambda = cross_validate_lambda(cv, gamma, &LAMBDA_GRID, CV_FOLDS, cv_seed)?;
                Ok(RegressorSpec::Krr { gamma, lambda })
            }
            Backend::Smoother { bandwidth } => Ok(RegressorSpec::smoother(bandwidth)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategyChoice {
    Grid { points: usize, span: f64 },
    LinearExact,
    MonotoneLimits,
}

impl StrategyChoice {
    fn build(&self, ys: &[f64]) -> FullStrategy {
        match *self {
            StrategyChoice::Grid { points, span } => FullStrategy::grid_around(ys, span, points),
            StrategyChoice::LinearExact => FullStrategy::LinearExact,
            StrategyChoice::MonotoneLimits => FullStrategy::MonotoneLimits,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodKind {
    SplitCps { backend: Backend, fraction: f64, transform: ResidualTransform },
    SplitRdps { backend: Backend, fraction: f64, transform: ResidualTransform },
    FullCps { backend: Backend, kind: ConformityKind },
    FullRdps { backend: Backend, strategy: StrategyChoice, trim: Option<f64> },
    QuantileSgdRdps { tau: f64, n_passes: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub name: String,
    pub kind: MethodKind,
}

/// Settings shared by the named methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodDefaults {
    pub split_fraction: f64,
    pub trim_fraction: f64,
    pub strategy: StrategyChoice,
    pub smoother_bandwidth: f64,
    pub sgd_passes: usize,
}

impl Default for MethodDefaults {
    fn default() -> Self {
        MethodDefaults {
            split_fraction: 0.5,
            trim_fraction: 0.05,
            strategy: StrategyChoice::Grid { points: 512, span: 3.0 },
            smoother_bandwidth: 1.0,
            sgd_passes: 10,
        }
    }
}

pub const METHOD_NAMES: [&str; 12] = [
    "split-cps-ols",
    "split-rdps-ols",
    "split-cps-krr",
    "lspm",
    "lspm-plain",
    "krrpm",
    "rdps-ols",
    "rdps-krr",
    "rdps-ols-deleted",
    "rdps-krr-deleted",
    "rdps-qsgd",
    "rdps-smoother",
];

impl MethodSpec {
    pub fn from_name(name: &str, d: &MethodDefaults) -> Result<Self> {
        use MethodKind::*;
        let split = |backend| SplitRdps {
            backend,
            fraction: d.split_fraction,
            transform: ResidualTransform::Identity,
        };
        let rdps = |backend, trim| FullRdps {
            backend,
            strategy: d.strategy,
            trim,
        };
        let kind = match name {
            "split-cps-ols" => SplitCps {
                backend: Backend::Ols,
                fraction: d.split_fraction,
                transform: ResidualTransform::Identity,
            },
            "split-rdps-ols" => split(Backend::Ols),
            "split-cps-krr" => SplitCps {
                backend: Backend::Krr,
                fraction: d.split_fraction,
                transform: ResidualTransform::Identity,
            },
            "lspm" => FullCps {
                backend: Backend::Ols,
                kind: ConformityKind::Studentised,
            },
            "lspm-plain" => FullCps {
                backend: Backend::Ols,
                kind: ConformityKind::Plain,
            },
            "krrpm" => FullCps {
                backend: Backend::Krr,
                kind: ConformityKind::Studentised,
            },
            "rdps-ols" => rdps(Backend::Ols, None),
            "rdps-krr" => rdps(Backend::Krr, None),
            "rdps-ols-deleted" => rdps(Backend::Ols, Some(d.trim_fraction)),
            "rdps-krr-deleted" => rdps(Backend::Krr, Some(d.trim_fraction)),
            "rdps-qsgd" => QuantileSgdRdps {
                tau: 0.5,
                n_passes: d.sgd_passes,
            },
            "rdps-smoother" => rdps(
                Backend::Smoother {
                    bandwidth: d.smoother_bandwidth,
                },
                None,
            ),
            other => {
                return Err(Error::invalid(
                    "method",
                    other,
                    "unknown method name (see `rdps reproduce --help` for the list)",
                ))
            }
        };
        Ok(MethodSpec {
            name: name.to_string(),
            kind,
        })
    }

    pub fn backend(&self) -> Option<Backend> {
        match &self.kind {
            MethodKind::SplitCps { backend, .. }
            | MethodKind::SplitRdps { backend, .. }
            | MethodKind::FullCps { backend, .. }
            | MethodKind::FullRdps { backend, .. } => Some(*backend),
            MethodKind::QuantileSgdRdps { .. } => None,
        }
    }

    /// Predictive system for `x_new`. `spec` is this method's resolved
    /// regressor (ignored by the quantile method) and `seed` drives any
    /// randomized ordering.
    pub fn system(&self, data: &Dataset, spec: Option<&RegressorSpec>, x_new: &[f64], seed: u64) -> Result<PredictiveSystem> {
        let need = || spec.cloned().ok_or_else(|| Error::invalid("method", &self.name, "needs a resolved regressor"));
        match &self.kind {
            MethodKind::SplitCps { fraction, transform, .. } => {
                let cfg = SplitConfig::new(SplitIndex::from_fraction(*fraction, data.len())?, need()?, *transform);
                split_cps_via_conformity(data, &cfg, x_new)
            }
            MethodKind::SplitRdps { fraction, transform, .. } => {
                let cfg = SplitConfig::new(SplitIndex::from_fraction(*fraction, data.len())?, need()?, *transform);
                split_system(data, &cfg, x_new)
            }
            MethodKind::FullCps { kind, .. } => full_cps(data, &need()?, *kind, x_new),
            MethodKind::FullRdps { strategy, trim, .. } => {
                let s = strategy.build(data.ys());
                match trim {
                    Some(q) => full_rdps_deleted(data, &need()?, *q, x_new, &s),
                    None => full_rdps(data, &need()?, x_new, &s),
                }
            }
            MethodKind::QuantileSgdRdps { tau, n_passes } => {
                let mut cfg = SgdConfig::default_for(data.ys(), *tau, seed);
                cfg.n_passes = *n_passes;
                quantile_sgd_full_rdps(data, &cfg, x_new)
            }
        }
    }
}
