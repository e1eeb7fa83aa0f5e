//! Full-conformal predictive systems: every candidate outcome `y'` of the
//! new covariate is added to the training data and the regressor refitted.

mod cps;
mod deleted;
mod envelope;
mod monotone;
mod qsgd;
mod rdps;

pub use cps::{full_cps, ConformityKind};
pub use deleted::full_rdps_deleted;
pub use envelope::{informativeness_envelope, EnvelopeReport};
pub use monotone::{monotonicity_check, MonotonicityReport, Violation};
pub use qsgd::quantile_sgd_full_rdps;
pub use rdps::{crossing_point, full_rdps, FullStrategy};

use crate::error::Result;
use crate::stepfn::{PredictiveSystem, StepFn};

/// Slopes below this magnitude are treated as exactly zero.
pub(crate) const SLOPE_EPS: f64 = 1e-12;

/// Pointwise extremes of the order statistics of atom vectors, one vector
/// per candidate `y'`. With `G_{y'}(y) = #{atoms ≤ y}/(n+1)`, the upper
/// bound counts the minimal order statistics and the lower bound the
/// maximal ones.
#[derive(Debug, Clone)]
pub(crate) struct RankEnvelope {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl RankEnvelope {
    pub fn new(m: usize) -> Self {
        RankEnvelope {
            lo: vec![f64::INFINITY; m],
            hi: vec![f64::NEG_INFINITY; m],
        }
    }

    /// Merges one candidate, using `sup_atoms` for the upper bound and
    /// `inf_atoms` for the lower bound (usually the same vector).
    pub fn push(&mut self, mut sup_atoms: Vec<f64>, mut inf_atoms: Vec<f64>) {
        sup_atoms.sort_by(f64::total_cmp);
        inf_atoms.sort_by(f64::total_cmp);
        for (l, a) in self.lo.iter_mut().zip(&sup_atoms) {
            *l = l.min(*a);
        }
        for (h, a) in self.hi.iter_mut().zip(&inf_atoms) {
            *h = h.max(*a);
        }
    }

    pub fn push_same(&mut self, atoms: Vec<f64>) {
        self.push(atoms.clone(), atoms);
    }

    pub fn into_system(self) -> Result<PredictiveSystem> {
        let d = self.lo.len() as u32;
        PredictiveSystem::new(StepFn::counting(&self.hi, 0, d)?, StepFn::counting(&self.lo, 0, d)?)
    }
}

/// Atoms `y_i + ŷ'_{n+1} - ŷ'_i` plus the candidate itself, from the fitted
/// values of the augmented data (new point last).
pub(crate) fn atoms_from_fitted(ys: &[f64], fitted: &[f64], y_prime: f64) -> Vec<f64> {
    let n = ys.len();
    let mut atoms: Vec<f64> = ys.iter().zip(fitted).map(|(y, f)| y + fitted[n] - f).collect();
    atoms.push(y_prime);
    atoms
}
