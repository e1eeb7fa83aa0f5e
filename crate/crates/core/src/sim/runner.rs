use std::collections::HashMap;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::generate::{generate, SettingKind};
use super::method::{Backend, MethodSpec};
use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::eval::{score_system, LevelGrid};
use crate::regress::RegressorSpec;
use crate::rng::SimRng;
use crate::stepfn::PredictiveSystem;

/// One scored interval. Failed cells carry `covered = None` and NaN values.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub method: String,
    pub replication: usize,
    pub level: f64,
    pub covered: Option<bool>,
    pub width: f64,
    pub interval_score: f64,
    pub thickness: f64,
}

impl RecordRow {
    /// Bitwise comparison, treating NaN cells as equal.
    pub fn same_as(&self, other: &RecordRow) -> bool {
        let eq = |a: f64, b: f64| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan());
        self.method == other.method
            && self.replication == other.replication
            && eq(self.level, other.level)
            && self.covered == other.covered
            && eq(self.width, other.width)
            && eq(self.interval_score, other.interval_score)
            && eq(self.thickness, other.thickness)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub method: String,
    pub replication: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub setting: SettingKind,
    pub n: usize,
    pub replications: usize,
    pub methods: Vec<String>,
    /// Ordered by method (configuration order), replication, level.
    pub rows: Vec<RecordRow>,
    pub failures: Vec<Failure>,
}

impl ExperimentResult {
    pub fn failure_rate(&self) -> f64 {
        let cells = self.methods.len() * self.replications;
        if cells == 0 {
            0.0
        } else {
            self.failures.len() as f64 / cells as f64
        }
    }

    pub fn rows_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a RecordRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }

    /// One thickness per successful replication of `method`.
    pub fn thicknesses(&self, method: &str) -> Vec<f64> {
        let mut seen = std::collections::BTreeMap::new();
        for r in self.rows_for(method) {
            if r.covered.is_some() {
                seen.entry(r.replication).or_insert(r.thickness);
            }
        }
        seen.into_values().collect()
    }
}

fn failed_rows(method: &str, rep: usize, levels: &LevelGrid) -> Vec<RecordRow> {
    levels
        .levels()
        .iter()
        .map(|&level| RecordRow {
            method: method.to_string(),
            replication: rep,
            level,
            covered: None,
            width: f64::NAN,
            interval_score: f64::NAN,
            thickness: f64::NAN,
        })
        .collect()
}

/// Data and seeds of one replication. Stream 0 draws the training data and
/// holdout, stream 1 the cross-validation sample, stream 2 the remaining
/// seeds, so adding methods never shifts any of them.
#[derive(Debug, Clone)]
pub struct Replication {
    pub data: Dataset,
    pub holdout: Sample,
    cv: Dataset,
    cv_seed: u64,
    method_seed: u64,
}

impl Replication {
    pub fn draw(setting: SettingKind, n: usize, seed: u64, rep: usize) -> Result<Self> {
        let key = [seed, rep as u64];
        let (data, holdout) = generate(setting, n, &mut SimRng::with_stream(&key, 0))?;
        let (cv, _) = generate(setting, n, &mut SimRng::with_stream(&key, 1))?;
        let mut aux = SimRng::with_stream(&key, 2);
        let cv_seed = aux.next_u64();
        let method_seed = aux.next_u64();
        Ok(Replication {
            data,
            holdout,
            cv,
            cv_seed,
            method_seed,
        })
    }

    pub fn resolve(&self, backend: Backend) -> Result<RegressorSpec> {
        backend.resolve(&self.data, &self.cv, self.cv_seed)
    }

    /// System of `method` at covariate `x` (the holdout covariate when `None`).
    pub fn system(&self, method: &MethodSpec, x: Option<&[f64]>) -> Result<PredictiveSystem> {
        let spec = method.backend().map(|b| self.resolve(b)).transpose()?;
        method.system(&self.data, spec.as_ref(), x.unwrap_or(&self.holdout.x), self.method_seed)
    }
}

fn run_replication(cfg: &ExperimentConfig, methods: &[MethodSpec], levels: &LevelGrid, rep: usize) -> Result<(Vec<Vec<RecordRow>>, Vec<Failure>)> {
    let r = Replication::draw(cfg.setting, cfg.n, cfg.seed, rep)?;
    let mut resolved: HashMap<String, std::result::Result<RegressorSpec, String>> = HashMap::new();
    let mut out = Vec::with_capacity(methods.len());
    let mut failures = Vec::new();
    for m in methods {
        let spec = match m.backend() {
            Some(b) => match resolved.entry(format!("{b:?}")).or_insert_with(|| r.resolve(b).map_err(|e| e.to_string())) {
                Ok(s) => Some(s.clone()),
                Err(reason) => {
                    failures.push(Failure {
                        method: m.name.clone(),
                        replication: rep,
                        reason: reason.clone(),
                    });
                    out.push(failed_rows(&m.name, rep, levels));
                    continue;
                }
            },
            None => None,
        };
        let scored = m
            .system(&r.data, spec.as_ref(), &r.holdout.x, r.method_seed)
            .and_then(|ps| Ok((ps.thickness(), score_system(&ps, r.holdout.y, levels)?)));
        match scored {
            Ok((thickness, records)) => out.push(
                records
                    .into_iter()
                    .map(|rec| RecordRow {
                        method: m.name.clone(),
                        replication: rep,
                        level: rec.level,
                        covered: Some(rec.covered),
                        width: rec.width,
                        interval_score: rec.interval_score,
                        thickness,
                    })
                    .collect(),
            ),
            Err(e) => {
                failures.push(Failure {
                    method: m.name.clone(),
                    replication: rep,
                    reason: e.to_string(),
                });
                out.push(failed_rows(&m.name, rep, levels));
            }
        }
    }
    Ok((out, failures))
}

fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let methods = cfg.method_specs()?;
    let levels = cfg.level_grid()?;
    let per_rep: Vec<(Vec<Vec<RecordRow>>, Vec<Failure>)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run_replication(cfg, &methods, &levels, rep))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(methods.len() * cfg.replications * levels.levels().len());
    for k in 0..methods.len() {
        for (rep_rows, _) in &per_rep {
            rows.extend(rep_rows[k].iter().cloned());
        }
    }
    let mut failures: Vec<Failure> = per_rep.into_iter().flat_map(|(_, f)| f).collect();
    let order: HashMap<&str, usize> = methods.iter().enumerate().map(|(i, m)| (m.name.as_str(), i)).collect();
    failures.sort_by_key(|f| (order[f.method.as_str()], f.replication));
    Ok(ExperimentResult {
        setting: cfg.setting,
        n: cfg.n,
        replications: cfg.replications,
        methods: methods.into_iter().map(|m| m.name).collect(),
        rows,
        failures,
    })
}

/// Runs every replication of `cfg`, on a dedicated pool of `threads`
/// workers when given. Output does not depend on the thread count.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult> {
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|_| Error::invalid("threads", t, "could not start the worker pool"))?;
            pool.install(|| run(cfg))
        }
        None => run(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(methods: &[&str]) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(SettingKind::Linear);
        c.n = 20;
        c.replications = 3;
        c.grid_points = 64;
        c.methods = methods.iter().map(|s| s.to_string()).collect();
        c
    }

    #[test]
    fn split_cps_and_rdps_coincide() {
        let r = run_experiment(&small(&["split-cps-ols", "split-rdps-ols", "split-cps-krr"]), None).unwrap();
        let a: Vec<_> = r.rows_for("split-cps-ols").collect();
        let b: Vec<_> = r.rows_for("split-rdps-ols").collect();
        assert_eq!(a.len(), 30);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.covered, x.width, x.interval_score, x.thickness), (y.covered, y.width, y.interval_score, y.thickness));
            assert_eq!(x.thickness, 1.0 / 11.0);
        }
    }

    #[test]
    fn adding_methods_keeps_rows() {
        let one = run_experiment(&small(&["lspm"]), Some(1)).unwrap();
        let two = run_experiment(&small(&["krrpm", "lspm"]), Some(2)).unwrap();
        let a: Vec<_> = one.rows_for("lspm").collect();
        let b: Vec<_> = two.rows_for("lspm").collect();
        assert!(a.iter().zip(&b).all(|(x, y)| x.same_as(y)));
    }

    #[test]
    fn every_method_runs() {
        let names: Vec<&str> = super::super::method::METHOD_NAMES.to_vec();
        let r = run_experiment(&small(&names), None).unwrap();
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert_eq!(r.rows.len(), names.len() * 3 * 10);
    }
}
