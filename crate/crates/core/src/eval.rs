//! Interval scores, coverage summaries and calibration diagnostics.

use std::collections::BTreeMap;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regress::{fit, RegressorSpec};
use crate::split::{ResidualTransform, Scale};
use crate::stepfn::{ForecastDistribution, PredictionInterval, PredictiveSystem};

/// Nominal levels `1 - α` at which central intervals are scored.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGrid {
    levels: Vec<f64>,
}

impl LevelGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Empty("level grid"));
        }
        if levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return Err(Error::invalid("levels", format!("{levels:?}"), "must lie in (0, 1)"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("levels", format!("{levels:?}"), "must be strictly increasing"));
        }
        Ok(LevelGrid { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

impl Default for LevelGrid {
    /// 0.50, 0.55, …, 0.95.
    fn default() -> Self {
        LevelGrid {
            levels: (0..10).map(|k| (50 + 5 * k) as f64 / 100.0).collect(),
        }
    }
}

/// Central-interval score `(hi - lo) + (2/α)(lo - y)⁺ + (2/α)(y - hi)⁺`
/// with `α = 1 - level`; infinite when an endpoint is infinite.
pub fn interval_score(iv: &PredictionInterval, y: f64) -> f64 {
    if !(iv.lo.is_finite() && iv.hi.is_finite()) {
        return f64::INFINITY;
    }
    let alpha = 1.0 - iv.level;
    let mut s = iv.hi - iv.lo;
    if y < iv.lo {
        s += 2.0 / alpha * (iv.lo - y);
    }
    if y > iv.hi {
        s += 2.0 / alpha * (y - iv.hi);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRecord {
    pub level: f64,
    pub covered: bool,
    pub width: f64,
    pub interval_score: f64,
}

impl ScoreRecord {
    pub fn score(iv: &PredictionInterval, y: f64) -> Self {
        ScoreRecord {
            level: iv.level,
            covered: iv.contains(y),
            width: iv.width(),
            interval_score: interval_score(iv, y),
        }
    }
}

/// Central intervals of `ps` at every level, scored against `y`.
pub fn score_system(ps: &PredictiveSystem, y: f64, levels: &LevelGrid) -> Result<Vec<ScoreRecord>> {
    levels
        .levels()
        .iter()
        .map(|l| Ok(ScoreRecord::score(&ps.central_interval(1.0 - l)?, y)))
        .collect()
}

pub fn coverage(records: &[ScoreRecord]) -> f64 {
    records.iter().filter(|r| r.covered).count() as f64 / records.len() as f64
}

fn finite_mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values
        .filter(|v| v.is_finite())
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Mean of the finite widths.
pub fn mean_width(records: &[ScoreRecord]) -> f64 {
    finite_mean(records.iter().map(|r| r.width))
}

/// Mean of the finite interval scores.
pub fn mean_score(records: &[ScoreRecord]) -> f64 {
    finite_mean(records.iter().map(|r| r.interval_score))
}

/// Fraction of records with an infinite endpoint.
pub fn defective_fraction(records: &[ScoreRecord]) -> f64 {
    records.iter().filter(|r| !r.width.is_finite()).count() as f64 / records.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSummary {
    pub level: f64,
    pub coverage: f64,
    pub mean_width: f64,
    pub mean_interval_score: f64,
    pub defective_fraction: f64,
    pub count: usize,
}

/// Per-level summaries, in increasing level order.
pub fn summarize(records: &[ScoreRecord]) -> Vec<LevelSummary> {
    let mut by_level: BTreeMap<u64, Vec<ScoreRecord>> = BTreeMap::new();
    for r in records {
        // levels lie in (0, 1), where the bit pattern orders like the value
        by_level.entry(r.level.to_bits()).or_default().push(*r);
    }
    by_level
        .into_values()
        .map(|rs| LevelSummary {
            level: rs[0].level,
            coverage: coverage(&rs),
            mean_width: mean_width(&rs),
            mean_interval_score: mean_score(&rs),
            defective_fraction: defective_fraction(&rs),
            count: rs.len(),
        })
        .collect()
}

/// Monte Carlo slack `3·√(α(1-α)/R)`.
pub fn mc_slack(alpha: f64, replications: usize) -> f64 {
    3.0 * (alpha * (1.0 - alpha) / replications as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub alpha: f64,
    /// Fraction with `G(y) ≤ α`.
    pub left: f64,
    /// Fraction with `G(y-) < α`.
    pub right: f64,
    pub slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub rows: Vec<CalibrationRow>,
}

impl CalibrationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

/// Sandwich `left ≤ α + slack` and `right ≥ α - slack` from pairs
/// `(G(y), G(y-))`.
fn sandwich(values: &[(f64, f64)], alphas: &[f64], slack: impl Fn(f64) -> f64) -> Result<CalibrationReport> {
    if values.is_empty() {
        return Err(Error::Empty("forecast/outcome pairs"));
    }
    let m = values.len() as f64;
    let rows = alphas
        .iter()
        .map(|&alpha| {
            let left = values.iter().filter(|(at, _)| *at <= alpha).count() as f64 / m;
            let right = values.iter().filter(|(_, below)| *below < alpha).count() as f64 / m;
            let slack = slack(alpha);
            CalibrationRow {
                alpha,
                left,
                right,
                slack,
                passed: left <= alpha + slack && right >= alpha - slack,
            }
        })
        .collect();
    Ok(CalibrationReport { rows })
}

/// Empirical probabilistic calibration of forecasts against outcomes.
pub fn probcal_check(
    forecasts: &[ForecastDistribution],
    outcomes: &[f64],
    alphas: &[f64],
    slack: f64,
) -> Result<CalibrationReport> {
    if forecasts.len() != outcomes.len() {
        return Err(Error::DimensionMismatch {
            expected: forecasts.len(),
            found: outcomes.len(),
        });
    }
    let values: Vec<(f64, f64)> = forecasts
        .iter()
        .zip(outcomes)
        .map(|(g, &y)| (g.eval(y), g.left_limit(y)))
        .collect();
    sandwich(&values, alphas, |_| slack)
}

/// In-sample calibration of the residual-distribution forecasts
/// `G_i(y) = #{j : ŷ_i + f_i⁻¹(f_j(ε_j)) ≤ y} / n` at the training
/// outcomes. The check runs on integer ranks of the transformed residuals,
/// so it holds with no slack.
pub fn insample_check(
    spec: &RegressorSpec,
    data: &Dataset,
    transform: ResidualTransform,
    alphas: &[f64],
) -> Result<CalibrationReport> {
    let fitted = fit(spec, data)?;
    let scale = Scale::build(transform, spec, data, &fitted)?;
    let scores: Vec<f64> = data
        .xs()
        .zip(fitted.residuals())
        .map(|(x, e)| e / scale.at(x))
        .collect();
    let n = scores.len();
    let mut sorted = scores.clone();
    sorted.sort_by(f64::total_cmp);
    let ranks: Vec<(usize, usize)> = scores
        .iter()
        .map(|s| {
            let at = sorted.partition_point(|v| v <= s);
            let below = sorted.partition_point(|v| v < s);
            (at, below)
        })
        .collect();
    // compare counts, not ratios, so that α·n is not rounded twice
    let tol = 1e-9;
    let rows = alphas
        .iter()
        .map(|&alpha| {
            let an = alpha * n as f64;
            let left = ranks.iter().filter(|(at, _)| (*at as f64) <= an + tol).count();
            let right = ranks.iter().filter(|(_, below)| (*below as f64) < an - tol).count();
            CalibrationRow {
                alpha,
                left: left as f64 / n as f64,
                right: right as f64 / n as f64,
                slack: 0.0,
                passed: left as f64 <= an + tol && right as f64 >= an - tol,
            }
        })
        .collect();
    Ok(CalibrationReport { rows })
}

/// Out-of-sample calibration of predictive systems over Monte Carlo
/// replications: `#{Π_ℓ(Y) ≤ α}/R ≤ α + s` and `#{Π_u(Y-) < α}/R ≥ α - s`
/// with `s = 3·√(α(1-α)/R)`.
pub fn system_calibration_check(systems: &[PredictiveSystem], outcomes: &[f64], alphas: &[f64]) -> Result<CalibrationReport> {
    if systems.len() != outcomes.len() {
        return Err(Error::DimensionMismatch {
            expected: systems.len(),
            found: outcomes.len(),
        });
    }
    let values: Vec<(f64, f64)> = systems
        .iter()
        .zip(outcomes)
        .map(|(ps, &y)| (ps.lower().eval(y), ps.upper().left_limit(y)))
        .collect();
    let r = systems.len();
    sandwich(&values, alphas, |a| mc_slack(a, r))
}
