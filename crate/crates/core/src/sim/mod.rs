//! Simulation settings, the replication runner and CSV persistence.

mod config;
mod generate;
mod method;
mod output;
mod runner;

pub use config::{defaults, ExperimentConfig};
pub use generate::{gen_linear, gen_nonlinear, generate, SettingKind};
pub use method::{Backend, MethodDefaults, MethodKind, MethodSpec, StrategyChoice, CV_FOLDS, LAMBDA_GRID, METHOD_NAMES};
pub use output::{
    emit_all, emit_bounds_csv, fmt_f64, median, read_records, write_failures, write_records, write_summary,
    write_thickness_summary, RECORDS_HEADER,
};
pub use runner::{run_experiment, ExperimentResult, Failure, RecordRow, Replication};
