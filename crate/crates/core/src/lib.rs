pub mod data;
pub mod error;
pub mod eval;
pub mod full;
pub mod linalg;
pub mod regress;
pub mod rng;
pub mod sim;
pub mod split;
pub mod stepfn;

#[cfg(test)]
pub(crate) mod testutil;

pub use data::{Dataset, Sample, SplitIndex};
pub use error::{Error, Result};
pub use stepfn::{ForecastDistribution, PredictionInterval, PredictiveSystem, StepFn};
