//! Step distribution functions and predictive systems.
//!
//! Every distribution function and every predictive-system bound in this
//! crate is a [`StepFn`]: a right-continuous, nondecreasing, piecewise
//! constant function with finitely many breakpoints whose values are
//! rationals `level / denom`. Keeping the values as integer counts over a
//! common denominator makes comparisons, thickness and equality checks
//! exact, which is what the conformal constructions produce anyway
//! (counts of indicators divided by a sample size).

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Right-continuous nondecreasing step function with values in `[0, 1]`.
///
/// `levels[k]` is the numerator of the value on the open interval
/// `(breakpoints[k-1], breakpoints[k])`, with `levels[0]` the value on the
/// left tail and the last entry the value on the right tail. At a
/// breakpoint the function takes the value of the interval to its right.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFn {
    breakpoints: Vec<f64>,
    levels: Vec<u32>,
    denom: u32,
}

impl StepFn {
    /// Builds and normalizes a step function, merging breakpoints across
    /// which the level does not change.
    pub fn new(breakpoints: Vec<f64>, levels: Vec<u32>, denom: u32) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidStepFn("denominator must be positive".into()));
        }
        if levels.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidStepFn(format!(
                "{} levels for {} breakpoints",
                levels.len(),
                breakpoints.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("step function breakpoints"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStepFn("breakpoints must be strictly increasing".into()));
        }
        for (k, w) in levels.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::NotMonotone {
                    at: breakpoints[k],
                    before: w[0] as f64 / denom as f64,
                    after: w[1] as f64 / denom as f64,
                });
            }
        }
        if *levels.last().unwrap() > denom {
            return Err(Error::InvalidStepFn("value exceeds 1".into()));
        }
        Ok(Self::normalized(breakpoints, levels, denom))
    }

    fn normalized(breakpoints: Vec<f64>, levels: Vec<u32>, denom: u32) -> Self {
        let mut bps = Vec::with_capacity(breakpoints.len());
        let mut lvls = Vec::with_capacity(levels.len());
        lvls.push(levels[0]);
        for (b, &l) in breakpoints.into_iter().zip(&levels[1..]) {
            if l != *lvls.last().unwrap() {
                bps.push(b);
                lvls.push(l);
            }
        }
        StepFn {
            breakpoints: bps,
            levels: lvls,
            denom,
        }
    }

    /// The constant function `level / denom`.
    pub fn constant(level: u32, denom: u32) -> Result<Self> {
        Self::new(Vec::new(), vec![level], denom)
    }

    /// `y ↦ (offset + #{a ∈ atoms : a ≤ y}) / denom`.
    ///
    /// Atoms at `-∞` count everywhere, atoms at `+∞` never count.
    pub fn counting(atoms: &[f64], offset: u32, denom: u32) -> Result<Self> {
        if atoms.iter().any(|a| a.is_nan()) {
            return Err(Error::NonFinite("atoms"));
        }
        let mut sorted: Vec<f64> = atoms.iter().copied().filter(|a| *a != f64::INFINITY).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let neg_inf = sorted.iter().take_while(|a| **a == f64::NEG_INFINITY).count();
        let mut level = offset + neg_inf as u32;
        let mut breakpoints = Vec::new();
        let mut levels = vec![level];
        for &a in &sorted[neg_inf..] {
            level += 1;
            if breakpoints.last() == Some(&a) {
                *levels.last_mut().unwrap() = level;
            } else {
                breakpoints.push(a);
                levels.push(level);
            }
        }
        Self::new(breakpoints, levels, denom)
    }

    /// Assembles a step function from a left-tail level and signed jumps.
    ///
    /// Jumps at equal locations are netted before checking monotonicity, so
    /// a decrease is reported only when the assembled function really drops.
    pub fn from_jumps(base: i64, mut jumps: Vec<(f64, i64)>, denom: u32) -> Result<Self> {
        if jumps.iter().any(|(y, _)| !y.is_finite()) {
            return Err(Error::NonFinite("jump locations"));
        }
        jumps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut breakpoints = Vec::new();
        let mut levels = vec![base];
        let mut current = base;
        let mut i = 0;
        while i < jumps.len() {
            let at = jumps[i].0;
            let mut net = 0;
            while i < jumps.len() && jumps[i].0 == at {
                net += jumps[i].1;
                i += 1;
            }
            if net < 0 {
                return Err(Error::NotMonotone {
                    at,
                    before: current as f64 / denom as f64,
                    after: (current + net) as f64 / denom as f64,
                });
            }
            current += net;
            breakpoints.push(at);
            levels.push(current);
        }
        if levels.iter().any(|&l| l < 0 || l > denom as i64) {
            return Err(Error::InvalidStepFn("level outside [0, 1]".into()));
        }
        Self::new(breakpoints, levels.into_iter().map(|l| l as u32).collect(), denom)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    /// Numerator of the value at `y`.
    pub fn level_at(&self, y: f64) -> u32 {
        self.levels[self.breakpoints.partition_point(|&b| b <= y)]
    }

    /// Numerator of the left limit at `y`.
    pub fn left_level_at(&self, y: f64) -> u32 {
        self.levels[self.breakpoints.partition_point(|&b| b < y)]
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.ratio(self.level_at(y))
    }

    /// `lim_{z ↑ y} f(z)`.
    pub fn left_limit(&self, y: f64) -> f64 {
        self.ratio(self.left_level_at(y))
    }

    pub fn value_at_neg_inf(&self) -> f64 {
        self.ratio(self.levels[0])
    }

    pub fn value_at_pos_inf(&self) -> f64 {
        self.ratio(*self.levels.last().unwrap())
    }

    fn ratio(&self, level: u32) -> f64 {
        level as f64 / self.denom as f64
    }

    /// Smallest `y` with `f(y) ≥ tau`.
    ///
    /// Returns `-∞` when the left tail already reaches `tau` and `+∞` when
    /// the function never does (a defective bound).
    pub fn quantile(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::invalid("tau", tau, "must lie in (0, 1)"));
        }
        match self.levels.iter().position(|&l| self.ratio(l) >= tau) {
            Some(0) => Ok(f64::NEG_INFINITY),
            Some(k) => Ok(self.breakpoints[k - 1]),
            None => Ok(f64::INFINITY),
        }
    }

    /// Compares `self` and `other` on every piece of their merged partition.
    /// Returns `true` when `self ≤ other` everywhere.
    pub fn dominated_by(&self, other: &StepFn) -> bool {
        pieces(self, other).all(|(a, b)| cmp_ratio(a, self.denom, b, other.denom) != Ordering::Greater)
    }
}

fn cmp_ratio(a: u32, da: u32, b: u32, db: u32) -> Ordering {
    (a as u64 * db as u64).cmp(&(b as u64 * da as u64))
}

/// Level pairs on every open piece of the merged partition, tails included.
fn pieces<'a>(f: &'a StepFn, g: &'a StepFn) -> impl Iterator<Item = (u32, u32)> + 'a {
    let mut merged: Vec<f64> = f.breakpoints.iter().chain(&g.breakpoints).copied().collect();
    merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
    merged.dedup();
    let tail = std::iter::once((f.levels[0], g.levels[0]));
    tail.chain(
        merged
            .into_iter()
            .map(move |b| (f.level_at(b), g.level_at(b))),
    )
}

/// A forecast distribution: a step function running from 0 to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastDistribution {
    cdf: StepFn,
}

impl ForecastDistribution {
    pub fn from_step(cdf: StepFn) -> Result<Self> {
        if cdf.levels[0] != 0 || *cdf.levels.last().unwrap() != cdf.denom {
            return Err(Error::InvalidStepFn(
                "forecast distribution must run from 0 to 1".into(),
            ));
        }
        Ok(ForecastDistribution { cdf })
    }

    pub fn cdf(&self) -> &StepFn {
        &self.cdf
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.cdf.eval(y)
    }

    pub fn left_limit(&self, y: f64) -> f64 {
        self.cdf.left_limit(y)
    }

    pub fn quantile(&self, tau: f64) -> Result<f64> {
        self.cdf.quantile(tau)
    }

    /// `(location, mass)` pairs.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let d = self.cdf.denom as f64;
        self.cdf
            .breakpoints
            .iter()
            .zip(self.cdf.levels.windows(2))
            .map(|(&b, w)| (b, (w[1] - w[0]) as f64 / d))
            .collect()
    }
}

/// Empirical distribution of `values`; tied values merge their mass.
pub fn ecdf(values: &[f64]) -> Result<ForecastDistribution> {
    if values.is_empty() {
        return Err(Error::Empty("ecdf values"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ecdf values"));
    }
    ForecastDistribution::from_step(StepFn::counting(values, 0, values.len() as u32)?)
}

/// A pair of stochastically ordered bounds `lower ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveSystem {
    lower: StepFn,
    upper: StepFn,
}

impl PredictiveSystem {
    pub fn new(lower: StepFn, upper: StepFn) -> Result<Self> {
        if lower.levels[0] != 0 {
            return Err(Error::InvalidStepFn("lower bound must vanish at -inf".into()));
        }
        if *upper.levels.last().unwrap() != upper.denom {
            return Err(Error::InvalidStepFn("upper bound must reach 1 at +inf".into()));
        }
        if !lower.dominated_by(&upper) {
            return Err(Error::InvalidStepFn("lower bound exceeds upper bound".into()));
        }
        Ok(PredictiveSystem { lower, upper })
    }

    pub fn lower(&self) -> &StepFn {
        &self.lower
    }

    pub fn upper(&self) -> &StepFn {
        &self.upper
    }

    /// Largest gap between the bounds over the open pieces of their merged
    /// partition. Values at the finitely many breakpoints do not count.
    pub fn thickness(&self) -> f64 {
        let (dl, du) = (self.lower.denom, self.upper.denom);
        if dl == du {
            let gap = pieces(&self.lower, &self.upper)
                .map(|(l, u)| u as i64 - l as i64)
                .max()
                .unwrap();
            gap as f64 / du as f64
        } else {
            pieces(&self.lower, &self.upper)
                .map(|(l, u)| u as f64 / du as f64 - l as f64 / dl as f64)
                .fold(f64::NEG_INFINITY, f64::max)
        }
    }

    /// Central `1 - alpha` interval from the `alpha/2` quantile of the upper
    /// bound and the `1 - alpha/2` quantile of the lower bound.
    pub fn central_interval(&self, alpha: f64) -> Result<PredictionInterval> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha", alpha, "must lie in (0, 1)"));
        }
        let lo = self.upper.quantile(alpha / 2.0)?;
        let hi = self.lower.quantile(1.0 - alpha / 2.0)?;
        Ok(PredictionInterval {
            level: 1.0 - alpha,
            lo,
            hi,
            defective: !lo.is_finite() || !hi.is_finite(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionInterval {
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
    /// Set when an endpoint is infinite.
    pub defective: bool,
}

impl PredictionInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lo <= y && y <= self.hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ecdf_counts() {
        let f = ecdf(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.eval(2.0), 2.0 / 3.0);
        let single = ecdf(&[5.0]).unwrap();
        assert_eq!(single.eval(4.999), 0.0);
        assert_eq!(single.eval(5.0), 1.0);
        let tied = ecdf(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(tied.eval(0.0), 2.0 / 3.0);
        assert_eq!(tied.atoms(), vec![(0.0, 2.0 / 3.0), (1.0, 1.0 / 3.0)]);
        assert!(matches!(ecdf(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn left_limits() {
        let atom = ecdf(&[0.0]).unwrap();
        assert_eq!(atom.eval(0.0), 1.0);
        assert_eq!(atom.left_limit(0.0), 0.0);
        let c = StepFn::constant(3, 10).unwrap();
        for y in [-5.0, 0.0, 7.0] {
            assert_eq!(c.eval(y), 0.3);
            assert_eq!(c.left_limit(y), 0.3);
        }
        assert_eq!(ecdf(&[1.0, 2.0]).unwrap().left_limit(2.0), 0.5);
    }

    #[test]
    fn quantiles() {
        let f = ecdf(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.quantile(0.5).unwrap(), 2.0);
        assert_eq!(f.quantile(1.0 / 3.0).unwrap(), 1.0);
        let capped = StepFn::new(vec![0.0], vec![0, 9], 10).unwrap();
        assert_eq!(capped.quantile(0.95).unwrap(), f64::INFINITY);
        assert!(f.quantile(0.0).is_err());
        assert!(f.quantile(1.0).is_err());
    }

    #[test]
    fn thickness_examples() {
        // constant gap of a quarter
        let lower = StepFn::new(vec![0.0], vec![0, 3], 4).unwrap();
        let upper = StepFn::new(vec![0.0], vec![1, 4], 4).unwrap();
        let ps = PredictiveSystem::new(lower, upper).unwrap();
        assert_eq!(ps.thickness(), 0.25);

        let f = ecdf(&[1.0, 2.0, 3.0]).unwrap().cdf().clone();
        let same = PredictiveSystem::new(f.clone(), f).unwrap();
        assert_eq!(same.thickness(), 0.0);

        // split layout with three calibration points
        let atoms = [0.0, 1.0, 2.0];
        let ps = PredictiveSystem::new(
            StepFn::counting(&atoms, 0, 4).unwrap(),
            StepFn::counting(&atoms, 1, 4).unwrap(),
        )
        .unwrap();
        assert_eq!(ps.thickness(), 0.25);
    }

    #[test]
    fn thickness_ignores_isolated_points() {
        // upper jumps at 0, lower jumps at 0 as well: only pieces count
        let lower = StepFn::counting(&[0.0], 0, 1).unwrap();
        let upper = StepFn::counting(&[0.0], 0, 1).unwrap();
        assert_eq!(PredictiveSystem::new(lower, upper).unwrap().thickness(), 0.0);
    }

    #[test]
    fn central_intervals() {
        let values: Vec<f64> = (1..=100).map(f64::from).collect();
        let f = ecdf(&values).unwrap().cdf().clone();
        let ps = PredictiveSystem::new(f.clone(), f).unwrap();
        let iv = ps.central_interval(0.2).unwrap();
        assert_eq!((iv.lo, iv.hi), (10.0, 90.0));
        assert!(!iv.defective);

        let point = ecdf(&[0.0]).unwrap().cdf().clone();
        let ps = PredictiveSystem::new(point.clone(), point).unwrap();
        for alpha in [0.01, 0.5, 0.9] {
            let iv = ps.central_interval(alpha).unwrap();
            assert_eq!((iv.lo, iv.hi), (0.0, 0.0));
        }

        // lower bound capped at 0.9: the upper endpoint is +inf
        let lower = StepFn::new(vec![0.0], vec![0, 9], 10).unwrap();
        let upper = StepFn::new(vec![-1.0], vec![0, 10], 10).unwrap();
        let ps = PredictiveSystem::new(lower, upper).unwrap();
        let iv = ps.central_interval(0.1).unwrap();
        assert_eq!(iv.lo, -1.0);
        assert_eq!(iv.hi, f64::INFINITY);
        assert!(iv.defective);
        assert!(ps.central_interval(1.0).is_err());
    }

    #[test]
    fn rejects_invalid_systems() {
        let hi = StepFn::constant(1, 1).unwrap();
        let lo = StepFn::constant(0, 1).unwrap();
        assert!(PredictiveSystem::new(hi.clone(), hi.clone()).is_err());
        assert!(PredictiveSystem::new(lo.clone(), lo.clone()).is_err());
        assert!(PredictiveSystem::new(lo, hi).is_ok());
        assert!(StepFn::new(vec![0.0], vec![2, 1], 2).is_err());
        assert!(StepFn::from_jumps(1, vec![(0.0, -1), (1.0, 1)], 2).is_err());
        let netted = StepFn::from_jumps(1, vec![(0.0, -1), (0.0, 1)], 2).unwrap();
        assert_eq!(netted, StepFn::constant(1, 2).unwrap());
    }

    fn finite() -> impl Strategy<Value = f64> {
        -100.0..100.0f64
    }

    proptest! {
        #[test]
        fn ecdf_tails(values in prop::collection::vec(finite(), 1..40)) {
            let f = ecdf(&values).unwrap();
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(f.eval(max), 1.0);
            prop_assert_eq!(f.eval(min - 1e-9), 0.0);
        }

        #[test]
        fn quantile_is_generalized_inverse(
            values in prop::collection::vec(finite(), 1..40),
            tau in 0.001..0.999f64,
        ) {
            let f = ecdf(&values).unwrap();
            let q = f.quantile(tau).unwrap();
            prop_assert!(f.eval(q) >= tau);
            for &v in &values {
                if v < q {
                    prop_assert!(f.eval(v) < tau);
                }
            }
        }

        #[test]
        fn thickness_matches_dense_grid(
            atoms in prop::collection::vec(-10i32..10, 1..12),
            extra in 0u32..3,
        ) {
            let atoms: Vec<f64> = atoms.into_iter().map(f64::from).collect();
            let denom = atoms.len() as u32 + extra;
            let lower = StepFn::counting(&atoms, 0, denom).unwrap();
            let upper = StepFn::counting(&atoms, extra, denom).unwrap();
            let ps = PredictiveSystem::new(lower, upper).unwrap();
            // breakpoints are integers: sample strictly between them
            let grid_max = (-120..120)
                .map(|k| k as f64 / 10.0 + 0.05)
                .map(|y| ps.upper().eval(y) - ps.lower().eval(y))
                .fold(0.0, f64::max);
            prop_assert!((ps.thickness() - grid_max).abs() < 1e-12);
            prop_assert!(ps.lower().dominated_by(ps.upper()));
        }
    }
}
