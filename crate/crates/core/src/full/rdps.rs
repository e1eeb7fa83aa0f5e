use rayon::prelude::*;

use super::{atoms_from_fitted, RankEnvelope, SLOPE_EPS};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regress::{affine_response, fit, AffineResponse, RegressorSpec};
use crate::stepfn::{PredictiveSystem, StepFn};

/// How the supremum and infimum over candidate outcomes `y'` are taken.
#[derive(Debug, Clone, PartialEq)]
pub enum FullStrategy {
    /// Refit at every grid point (plus the analytic limits `y' → ±∞` when
    /// the backend is linear in the outcomes).
    Grid(Vec<f64>),
    /// Exact computation for backends linear in the outcomes.
    LinearExact,
    /// Two limit evaluations; valid when every prediction difference
    /// `ŷ'_{n+1} - ŷ'_i` is nondecreasing in `y'`.
    MonotoneLimits,
}

impl FullStrategy {
    pub const DEFAULT_GRID_POINTS: usize = 512;

    /// Evenly spaced grid over `[min - span·r, max + span·r]`, `r` the
    /// range of `ys` (one when the outcomes are constant).
    pub fn grid_around(ys: &[f64], span: f64, points: usize) -> Self {
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let r = if hi > lo { hi - lo } else { 1.0 };
        let (a, b) = (lo - span * r, hi + span * r);
        let k = points.max(2);
        FullStrategy::Grid((0..k).map(|j| a + (b - a) * j as f64 / (k - 1) as f64).collect())
    }

    /// 512 points spanning three ranges beyond the data.
    pub fn default_grid(ys: &[f64]) -> Self {
        Self::grid_around(ys, 3.0, Self::DEFAULT_GRID_POINTS)
    }

    pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
        if grid.is_empty() {
            return Err(Error::Empty("y' grid"));
        }
        if grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("y' grid"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("y' grid", "", "must be strictly increasing"));
        }
        Ok(())
    }
}

/// The `y'` at which the indicator `{(a_new - a_i) y' ≤ y - b̃_i}` flips;
/// `None` when the slopes coincide.
pub fn crossing_point(a_i: f64, a_new: f64, b_tilde: f64, y: f64) -> Option<f64> {
    let s = a_new - a_i;
    (s != 0.0).then(|| (y - b_tilde) / s)
}

/// Atom `i` as a function of the candidate: `t + s·z`, with `z` the
/// (clipped) candidate.
#[derive(Debug, Clone, Copy)]
struct Line {
    s: f64,
    t: f64,
}

impl Line {
    fn at(&self, z: f64) -> f64 {
        if self.s == 0.0 {
            self.t
        } else {
            self.t + self.s * z
        }
    }
}

fn training_lines(resp: &AffineResponse, ys: &[f64]) -> Vec<Line> {
    (0..ys.len())
        .map(|i| {
            let (s, dt) = resp.difference(i);
            Line {
                s: if s.abs() <= SLOPE_EPS { 0.0 } else { s },
                t: ys[i] + dt,
            }
        })
        .collect()
}

/// Training atoms in the limit where the clipped candidate sits at `z`
/// (possibly infinite).
fn limit_atoms(lines: &[Line], z: f64) -> Vec<f64> {
    lines
        .iter()
        .map(|l| {
            if l.s == 0.0 {
                l.t
            } else if z.is_infinite() {
                if (l.s > 0.0) == (z > 0.0) {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                l.at(z)
            }
        })
        .collect()
}

/// Atom vectors at the limits `y' → -∞` and `y' → +∞`.
fn analytic_limits(resp: &AffineResponse, ys: &[f64]) -> [Vec<f64>; 2] {
    let lines = training_lines(resp, ys);
    let (lo, hi) = resp.clip.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let mut down = limit_atoms(&lines, lo);
    down.push(f64::NEG_INFINITY);
    let mut up = limit_atoms(&lines, hi);
    up.push(f64::INFINITY);
    [down, up]
}

/// Bounds at one `y'` domain `[p, q]` on which every atom is affine.
struct Piece {
    lines: Vec<Line>,
    p: f64,
    q: f64,
}

impl Piece {
    /// Min and max over `y' ∈ [p, q]` of `#{lines with t + s y' ≤ y}`.
    fn count_range(&self, y: f64) -> (usize, usize) {
        let mut base = 0usize;
        let mut pos = Vec::new(); // indicator holds for y' ≤ c
        let mut neg = Vec::new(); // indicator holds for y' ≥ c
        for l in &self.lines {
            if l.s == 0.0 {
                base += (l.t <= y) as usize;
            } else {
                let c = (y - l.t) / l.s;
                if l.s > 0.0 {
                    pos.push(c);
                } else {
                    neg.push(c);
                }
            }
        }
        pos.sort_by(f64::total_cmp);
        neg.sort_by(f64::total_cmp);
        let count = |v: f64| -> usize {
            let p = if v == f64::NEG_INFINITY {
                pos.len()
            } else if v == f64::INFINITY {
                0
            } else {
                pos.len() - pos.partition_point(|&c| c < v)
            };
            let n = if v == f64::NEG_INFINITY {
                0
            } else if v == f64::INFINITY {
                neg.len()
            } else {
                neg.partition_point(|&c| c <= v)
            };
            base + p + n
        };
        let mut cand: Vec<f64> = pos
            .iter()
            .chain(&neg)
            .copied()
            .filter(|c| *c > self.p && *c < self.q)
            .collect();
        cand.sort_by(f64::total_cmp);
        let mut probes = vec![self.p, self.q];
        let inner_pts = std::iter::once(self.p).chain(cand.iter().copied()).chain(std::iter::once(self.q));
        let inner_pts: Vec<f64> = inner_pts.collect();
        for w in inner_pts.windows(2) {
            probes.push(w[0]);
            let mid = if w[0].is_finite() && w[1].is_finite() {
                0.5 * (w[0] + w[1])
            } else if w[0].is_finite() {
                w[0] + 1.0 + w[0].abs()
            } else if w[1].is_finite() {
                w[1] - 1.0 - w[1].abs()
            } else {
                0.0
            };
            probes.push(mid);
        }
        let (mut lo, mut hi) = (usize::MAX, 0);
        for v in probes {
            let k = count(v);
            lo = lo.min(k);
            hi = hi.max(k);
        }
        (lo, hi)
    }

    /// Outcome values at which the count range can change.
    fn critical_values(&self, out: &mut Vec<f64>) {
        for (j, a) in self.lines.iter().enumerate() {
            if a.s == 0.0 {
                out.push(a.t);
            }
            for end in [self.p, self.q] {
                if end.is_finite() {
                    out.push(a.at(end));
                }
            }
            for b in &self.lines[j + 1..] {
                if a.s != b.s {
                    let z = (b.t - a.t) / (a.s - b.s);
                    out.push(a.at(z));
                }
            }
        }
    }
}

fn pieces(resp: &AffineResponse, ys: &[f64]) -> Vec<Piece> {
    let lines = training_lines(resp, ys);
    let new = Line { s: 1.0, t: 0.0 };
    let with_new = |mut v: Vec<Line>| {
        v.push(new);
        v
    };
    let frozen = |z: f64| with_new(lines.iter().map(|l| Line { s: 0.0, t: l.at(z) }).collect());
    match resp.clip {
        None => vec![Piece {
            lines: with_new(lines.clone()),
            p: f64::NEG_INFINITY,
            q: f64::INFINITY,
        }],
        Some((lo, hi)) => {
            let mut out = Vec::new();
            if lo.is_finite() {
                out.push(Piece {
                    lines: frozen(lo),
                    p: f64::NEG_INFINITY,
                    q: lo,
                });
            }
            out.push(Piece {
                lines: with_new(lines.clone()),
                p: lo,
                q: hi,
            });
            if hi.is_finite() {
                out.push(Piece {
                    lines: frozen(hi),
                    p: hi,
                    q: f64::INFINITY,
                });
            }
            out
        }
    }
}

/// Exact `(inf, sup)` over `y'` of `(n+1)·G_{y'}(y)` for a linear smoother.
fn bounds_at(pieces: &[Piece], y: f64) -> (u32, u32) {
    pieces.iter().fold((u32::MAX, 0), |(lo, hi), pc| {
        let (a, b) = pc.count_range(y);
        (lo.min(a as u32), hi.max(b as u32))
    })
}

fn linear_exact(resp: &AffineResponse, ys: &[f64]) -> Result<PredictiveSystem> {
    let pcs = pieces(resp, ys);
    let mut cuts = Vec::new();
    for pc in &pcs {
        pc.critical_values(&mut cuts);
    }
    cuts.retain(|c| c.is_finite());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let d = (ys.len() + 1) as u32;
    if cuts.is_empty() {
        let (lo, hi) = bounds_at(&pcs, 0.0);
        return PredictiveSystem::new(StepFn::constant(lo, d)?, StepFn::constant(hi, d)?);
    }
    let first = cuts[0];
    let last = cuts[cuts.len() - 1];
    let mut probes = vec![first - 1.0 - first.abs()];
    probes.extend(cuts.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    probes.push(last + 1.0 + last.abs());
    let (lower, upper): (Vec<u32>, Vec<u32>) = probes.iter().map(|&y| bounds_at(&pcs, y)).unzip();
    PredictiveSystem::new(StepFn::new(cuts.clone(), lower, d)?, StepFn::new(cuts, upper, d)?)
}

fn grid_envelope(data: &Dataset, spec: &RegressorSpec, x_new: &[f64], grid: &[f64]) -> Result<RankEnvelope> {
    let ys = data.ys();
    let atoms: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&yp| {
            let f = fit(spec, &data.augmented(x_new, yp))?;
            Ok(atoms_from_fitted(ys, f.fitted(), yp))
        })
        .collect::<Result<_>>()?;
    let mut env = RankEnvelope::new(ys.len() + 1);
    for a in atoms {
        env.push_same(a);
    }
    Ok(env)
}

/// Residual-distribution predictive system in the full setting: the
/// envelope over `y'` of the forecast built from the augmented refit,
/// `G_{y'}(y) = (#{i ≤ n : y_i + ŷ'_{n+1} - ŷ'_i ≤ y} + 1{y' ≤ y}) / (n+1)`.
pub fn full_rdps(data: &Dataset, spec: &RegressorSpec, x_new: &[f64], strategy: &FullStrategy) -> Result<PredictiveSystem> {
    spec.validate()?;
    data.check_covariate(x_new)?;
    match strategy {
        FullStrategy::Grid(grid) => {
            FullStrategy::validate_grid(grid)?;
            let mut env = grid_envelope(data, spec, x_new, grid)?;
            match affine_response(spec, data, x_new) {
                Ok(resp) => {
                    for a in analytic_limits(&resp, data.ys()) {
                        env.push_same(a);
                    }
                }
                Err(Error::Capability(_)) => {}
                Err(e) => return Err(e),
            }
            env.into_system()
        }
        FullStrategy::LinearExact => linear_exact(&affine_response(spec, data, x_new)?, data.ys()),
        FullStrategy::MonotoneLimits => {
            let resp = affine_response(spec, data, x_new)?;
            for i in 0..data.len() {
                let (s, _) = resp.difference(i);
                if s < -SLOPE_EPS {
                    return Err(Error::NotMonotoneDifference { index: i, slope: s });
                }
            }
            let [down, up] = analytic_limits(&resp, data.ys());
            let d = (data.len() + 1) as u32;
            PredictiveSystem::new(StepFn::counting(&up, 0, d)?, StepFn::counting(&down, 0, d)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_data, random_data_dim};

    fn forecast_at(data: &Dataset, spec: &RegressorSpec, x_new: &[f64], yp: f64) -> StepFn {
        let f = fit(spec, &data.augmented(x_new, yp)).unwrap();
        StepFn::counting(&atoms_from_fitted(data.ys(), f.fitted(), yp), 0, data.len() as u32 + 1).unwrap()
    }

    fn probe_points(ps: &PredictiveSystem) -> Vec<f64> {
        let mut b: Vec<f64> = ps.lower().breakpoints().iter().chain(ps.upper().breakpoints()).copied().collect();
        b.sort_by(f64::total_cmp);
        if b.is_empty() {
            return vec![0.0];
        }
        let mut out = vec![b[0] - 1.0, b[b.len() - 1] + 1.0];
        out.extend(b.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        out.extend(b);
        out
    }

    #[test]
    fn crossing_formula() {
        let c = crossing_point(0.2, 0.5, 1.0, 2.0).unwrap();
        assert!((c - 10.0 / 3.0).abs() < 1e-12);
        assert_eq!(crossing_point(0.4, 0.4, 1.0, 2.0), None);
    }

    #[test]
    fn exact_bounds_bracket_single_forecasts() {
        let mut rng = crate::rng::SimRng::new(&[3]);
        for seed in 0..5 {
            let data = random_data(12, seed);
            for spec in [RegressorSpec::ols(), RegressorSpec::Krr { gamma: 1.0, lambda: 0.5 }, RegressorSpec::smoother(0.8)] {
                let ps = full_rdps(&data, &spec, &[0.3], &FullStrategy::LinearExact).unwrap();
                for _ in 0..50 {
                    let yp = 5.0 * rng.standard_normal();
                    let g = forecast_at(&data, &spec, &[0.3], yp);
                    for y in probe_points(&ps) {
                        assert!(ps.lower().level_at(y) <= g.level_at(y) + 0 && g.level_at(y) <= ps.upper().level_at(y) || {
                            // a forecast breakpoint can sit exactly on y; compare right limits
                            let yy = y + 1e-9 * (1.0 + y.abs());
                            ps.lower().level_at(yy) <= g.level_at(yy) && g.level_at(yy) <= ps.upper().level_at(yy)
                        }, "{spec:?} y'={yp} y={y}");
                    }
                }
            }
        }
    }

    #[test]
    fn exact_agrees_with_dense_grid() {
        for seed in 0..8 {
            let data = random_data_dim(10, 2, seed);
            let x_new = [0.5, -0.2];
            let specs = [
                RegressorSpec::ols(),
                RegressorSpec::Krr { gamma: 1.5, lambda: 0.3 },
                RegressorSpec::KernelSmoother { bandwidth: 0.8, trim_lo: -1.0, trim_hi: 1.0 },
            ];
            for spec in specs {
                let exact = full_rdps(&data, &spec, &x_new, &FullStrategy::LinearExact).unwrap();
                let grid = full_rdps(&data, &spec, &x_new, &FullStrategy::grid_around(data.ys(), 10.0, 2001)).unwrap();
                let mut b: Vec<f64> = [exact.lower(), exact.upper(), grid.lower(), grid.upper()]
                    .iter()
                    .flat_map(|f| f.breakpoints().to_vec())
                    .collect();
                b.sort_by(f64::total_cmp);
                b.dedup_by(|u, v| (*u - *v).abs() < 1e-9);
                let mut probes: Vec<f64> = b.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                probes.extend(b.first().map(|v| v - 1.0));
                probes.extend(b.last().map(|v| v + 1.0));
                for y in probes {
                    let du = exact.upper().level_at(y) as i64 - grid.upper().level_at(y) as i64;
                    let dl = exact.lower().level_at(y) as i64 - grid.lower().level_at(y) as i64;
                    assert!(du.abs() <= 1 && dl.abs() <= 1, "seed {seed} {spec:?} y={y} du={du} dl={dl}");
                    // a finite grid can only shrink the envelope
                    assert!(du >= 0 && dl <= 0, "seed {seed} {spec:?} y={y} du={du} dl={dl}");
                }
            }
        }
    }

    #[test]
    fn monotone_limits_match_exact_for_smoother() {
        for seed in 0..10 {
            let data = random_data(10, seed);
            let spec = RegressorSpec::smoother(0.7);
            let a = full_rdps(&data, &spec, &[0.1], &FullStrategy::LinearExact).unwrap();
            let b = full_rdps(&data, &spec, &[0.1], &FullStrategy::MonotoneLimits).unwrap();
            assert_eq!(a, b, "seed {seed}");
        }
    }

    #[test]
    fn clipped_smoother_strategies_agree() {
        for seed in 0..6 {
            let data = random_data(10, seed);
            let spec = RegressorSpec::KernelSmoother {
                bandwidth: 0.7,
                trim_lo: -1.0,
                trim_hi: 1.5,
            };
            let a = full_rdps(&data, &spec, &[0.1], &FullStrategy::LinearExact).unwrap();
            let b = full_rdps(&data, &spec, &[0.1], &FullStrategy::MonotoneLimits).unwrap();
            for y in probe_points(&a) {
                assert_eq!(a.lower().level_at(y), b.lower().level_at(y), "seed {seed} y={y}");
                assert_eq!(a.upper().level_at(y), b.upper().level_at(y), "seed {seed} y={y}");
            }
            // clipped predictions are bounded, so the bounds are proper
            assert_eq!(a.lower().value_at_pos_inf(), 1.0 - 1.0 / 11.0);
            assert_eq!(a.upper().value_at_neg_inf(), 1.0 / 11.0);
        }
    }

    #[test]
    fn monotone_limits_rejects_decreasing_difference() {
        let data = random_data(10, 4);
        let r = full_rdps(&data, &RegressorSpec::ols(), &[0.0], &FullStrategy::MonotoneLimits);
        assert!(matches!(r, Err(Error::NotMonotoneDifference { .. })));
    }

    #[test]
    fn equal_slopes_need_no_division() {
        // intercept-only: every prediction moves with the same slope
        let data = Dataset::univariate(&[0.0, 1.0, 2.0], &[0.0, 3.0, 1.0]).unwrap();
        let spec = RegressorSpec::Ols { intercept_only: true };
        let ps = full_rdps(&data, &spec, &[1.0], &FullStrategy::LinearExact).unwrap();
        // training atoms are the outcomes themselves; only the new atom moves
        assert_eq!(ps.lower().breakpoints(), &[0.0, 1.0, 3.0]);
        assert_eq!(ps.lower().levels(), &[0, 1, 2, 3]);
        assert_eq!(ps.upper().levels(), &[1, 2, 3, 4]);
        assert_eq!(ps.thickness(), 0.25);
    }

    #[test]
    fn grid_validation() {
        let data = random_data(5, 1);
        for g in [vec![], vec![1.0, 1.0], vec![0.0, f64::NAN]] {
            assert!(full_rdps(&data, &RegressorSpec::ols(), &[0.0], &FullStrategy::Grid(g)).is_err());
        }
    }
}
