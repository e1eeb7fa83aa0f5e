use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::generate::SettingKind;
use super::method::{MethodDefaults, MethodSpec, StrategyChoice};
use crate::error::{Error, Result};
use crate::eval::LevelGrid;

/// Experiment description, read from a flat TOML file:
///
/// ```toml
/// setting = "linear"          # or "nonlinear"
/// n = 100                     # training size, at least 10
/// replications = 1000
/// seed = 42
/// methods = ["lspm", "krrpm", "rdps-ols-deleted", "rdps-krr-deleted"]
/// levels = [0.5, 0.9]         # default 0.50, 0.55, ..., 0.95
/// trim_fraction = 0.05        # deleted variants
/// strategy = "grid"           # full RDPS: grid | exact | limits
/// grid_points = 512
/// grid_span = 3.0             # grid covers min(y) - span*range .. max(y) + span*range
/// split_fraction = 0.5        # estimation share for split methods
/// smoother_bandwidth = 1.0
/// sgd_passes = 10
/// output_dir = "results"
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub setting: SettingKind,
    #[serde(default = "defaults::n")]
    pub n: usize,
    #[serde(default = "defaults::replications")]
    pub replications: usize,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    #[serde(default = "defaults::methods")]
    pub methods: Vec<String>,
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
    #[serde(default = "defaults::trim_fraction")]
    pub trim_fraction: f64,
    #[serde(default = "defaults::strategy")]
    pub strategy: String,
    #[serde(default = "defaults::grid_points")]
    pub grid_points: usize,
    #[serde(default = "defaults::grid_span")]
    pub grid_span: f64,
    #[serde(default = "defaults::split_fraction")]
    pub split_fraction: f64,
    #[serde(default = "defaults::smoother_bandwidth")]
    pub smoother_bandwidth: f64,
    #[serde(default = "defaults::sgd_passes")]
    pub sgd_passes: usize,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
}

pub mod defaults {
    use std::path::PathBuf;

    pub const N: usize = 100;
    pub const REPLICATIONS: usize = 1000;
    pub const SEED: u64 = 42;
    pub const TRIM_FRACTION: f64 = 0.05;
    pub const GRID_POINTS: usize = 512;
    pub const METHODS: [&str; 4] = ["lspm", "krrpm", "rdps-ols-deleted", "rdps-krr-deleted"];

    pub fn n() -> usize {
        N
    }
    pub fn replications() -> usize {
        REPLICATIONS
    }
    pub fn seed() -> u64 {
        SEED
    }
    pub fn methods() -> Vec<String> {
        METHODS.iter().map(|s| s.to_string()).collect()
    }
    pub fn trim_fraction() -> f64 {
        TRIM_FRACTION
    }
    pub fn strategy() -> String {
        "grid".into()
    }
    pub fn grid_points() -> usize {
        GRID_POINTS
    }
    pub fn grid_span() -> f64 {
        3.0
    }
    pub fn split_fraction() -> f64 {
        0.5
    }
    pub fn smoother_bandwidth() -> f64 {
        1.0
    }
    pub fn sgd_passes() -> usize {
        10
    }
    pub fn output_dir() -> PathBuf {
        PathBuf::from("results")
    }
}

impl ExperimentConfig {
    /// Defaults for `setting`.
    pub fn new(setting: SettingKind) -> Self {
        ExperimentConfig {
            setting,
            n: defaults::n(),
            replications: defaults::replications(),
            seed: defaults::seed(),
            methods: defaults::methods(),
            levels: None,
            trim_fraction: defaults::trim_fraction(),
            strategy: defaults::strategy(),
            grid_points: defaults::grid_points(),
            grid_span: defaults::grid_span(),
            split_fraction: defaults::split_fraction(),
            smoother_bandwidth: defaults::smoother_bandwidth(),
            sgd_passes: defaults::sgd_passes(),
            output_dir: defaults::output_dir(),
        }
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn level_grid(&self) -> Result<LevelGrid> {
        match &self.levels {
            Some(l) => LevelGrid::new(l.clone()),
            None => Ok(LevelGrid::default()),
        }
    }

    pub fn method_defaults(&self) -> Result<MethodDefaults> {
        let strategy = match self.strategy.as_str() {
            "grid" => {
                if self.grid_points < 2 || !(self.grid_span >= 0.0 && self.grid_span.is_finite()) {
                    return Err(Error::invalid("grid", self.grid_points, "need at least 2 points and a finite span"));
                }
                StrategyChoice::Grid {
                    points: self.grid_points,
                    span: self.grid_span,
                }
            }
            "exact" => StrategyChoice::LinearExact,
            "limits" => StrategyChoice::MonotoneLimits,
            other => return Err(Error::invalid("strategy", other, "expected grid, exact or limits")),
        };
        Ok(MethodDefaults {
            split_fraction: self.split_fraction,
            trim_fraction: self.trim_fraction,
            strategy,
            smoother_bandwidth: self.smoother_bandwidth,
            sgd_passes: self.sgd_passes,
        })
    }

    pub fn method_specs(&self) -> Result<Vec<MethodSpec>> {
        if self.methods.is_empty() {
            return Err(Error::Empty("methods"));
        }
        let d = self.method_defaults()?;
        let mut out: Vec<MethodSpec> = Vec::new();
        for name in &self.methods {
            if out.iter().any(|m| &m.name == name) {
                return Err(Error::invalid("methods", name, "method names must be unique"));
            }
            out.push(MethodSpec::from_name(name, &d)?);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::invalid("n", self.n, "must be at least 10"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications", 0, "must be at least 1"));
        }
        self.level_grid()?;
        self.method_specs()?;
        Ok(())
    }
}
