use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument `{name}` = {value}: {reason}")]
    InvalidArgument {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid step function: {0}")]
    InvalidStepFn(String),

    /// A bound assembled from indicator counts decreased; carries the
    /// interval on which it happens.
    #[error("bound is not monotone: drops from {before} to {after} at y = {at}")]
    NotMonotone { at: f64, before: f64, after: f64 },

    #[error("design matrix is rank deficient: numerical rank {rank} < {columns} columns")]
    RankDeficient { rank: usize, columns: usize },

    #[error("matrix is numerically singular (reciprocal condition {rcond:e})")]
    Singular { rcond: f64 },

    #[error("leverage {leverage} of sample {index} is not below 1")]
    LeverageOne { index: usize, leverage: f64 },

    #[error("unsupported capability: {0}")]
    Capability(String),

    #[error(
        "prediction difference for sample {index} decreases in y' (slope {slope:e}); \
         use the LinearExact or Grid strategy"
    )]
    NotMonotoneDifference { index: usize, slope: f64 },

    #[error("trimming leaves {survivors} samples, at least 2 are required")]
    TooFewSurvivors { survivors: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: impl ToString, reason: &'static str) -> Self {
        Error::InvalidArgument {
            name,
            value: value.to_string(),
            reason,
        }
    }
}
