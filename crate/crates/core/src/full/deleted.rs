use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{atoms_from_fitted, full_rdps, FullStrategy, RankEnvelope};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regress::{affine_response, deleted_fit, LinearKind, RegressorSpec};
use crate::stepfn::PredictiveSystem;

/// Full residual-distribution system whose refits trim the `⌈q(n+1)⌉`
/// largest absolute residuals of the augmented data before refitting.
/// Deletion is not linear in `y'`, so only the grid strategy applies and no
/// analytic limits are added.
pub fn full_rdps_deleted(
    data: &Dataset,
    inner: &RegressorSpec,
    q: f64,
    x_new: &[f64],
    strategy: &FullStrategy,
) -> Result<PredictiveSystem> {
    RegressorSpec::deleted(inner.clone(), q).validate()?;
    data.check_covariate(x_new)?;
    let FullStrategy::Grid(grid) = strategy else {
        return Err(Error::Capability("deleted refits support only the grid strategy".into()));
    };
    FullStrategy::validate_grid(grid)?;
    if q == 0.0 {
        return full_rdps(data, inner, x_new, strategy);
    }
    let mut env = RankEnvelope::new(data.len() + 1);
    let atoms = match LinearKind::of(inner) {
        Some(kind) => linear_atoms(data, inner, kind, q, x_new, grid)?,
        None => grid
            .par_iter()
            .map(|&yp| {
                let f = deleted_fit(&data.augmented(x_new, yp), inner, q)?;
                Ok(atoms_from_fitted(data.ys(), f.fitted(), yp))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    for a in atoms {
        env.push_same(a);
    }
    env.into_system()
}

/// Linear inner fits: first-stage residuals are affine in the (clipped)
/// candidate, and each distinct survivor set needs one prediction matrix.
fn linear_atoms(
    data: &Dataset,
    inner: &RegressorSpec,
    kind: LinearKind,
    q: f64,
    x_new: &[f64],
    grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let n = data.len();
    let resp = affine_response(inner, data, x_new)?;
    let (a, b) = (&resp.coeffs.a, &resp.coeffs.b);
    let ys = data.ys();
    let keep: Vec<Vec<usize>> = grid
        .iter()
        .map(|&yp| {
            let z = resp.clipped(yp);
            let residuals: Vec<f64> = (0..=n)
                .map(|i| {
                    let y = if i < n { ys[i] } else { yp };
                    y - (a[i] * z + b[i])
                })
                .collect();
            crate::regress::deleted_survivors(&residuals, q)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<&[f64]> = data.xs().collect();
    rows.push(x_new);
    let mut sets: BTreeMap<&[usize], Option<DMatrix<f64>>> = keep.iter().map(|k| (k.as_slice(), None)).collect();
    let mats: Vec<(&[usize], Result<DMatrix<f64>>)> = sets
        .keys()
        .copied()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|s| (s, kind.prediction_matrix(&rows, s)))
        .collect();
    for (s, m) in mats {
        sets.insert(s, Some(m?));
    }
    Ok(grid
        .par_iter()
        .zip(&keep)
        .map(|(&yp, s)| {
            let p = sets[s.as_slice()].as_ref().expect("matrix computed");
            let targets: Vec<f64> = s.iter().map(|&j| kind.target(if j < n { ys[j] } else { yp })).collect();
            let fitted: Vec<f64> = (0..=n).map(|i| (0..s.len()).map(|c| p[(i, c)] * targets[c]).sum()).collect();
            atoms_from_fitted(ys, &fitted, yp)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::{SgdConfig, StepSchedule};
    use crate::stepfn::StepFn;
    use crate::testutil::random_data;

    fn brute(data: &Dataset, inner: &RegressorSpec, q: f64, x_new: &[f64], grid: &[f64]) -> PredictiveSystem {
        let mut env = RankEnvelope::new(data.len() + 1);
        for &yp in grid {
            let f = deleted_fit(&data.augmented(x_new, yp), inner, q).unwrap();
            env.push_same(atoms_from_fitted(data.ys(), f.fitted(), yp));
        }
        env.into_system().unwrap()
    }

    fn close(a: &StepFn, b: &StepFn) -> bool {
        a.levels() == b.levels()
            && a.breakpoints().len() == b.breakpoints().len()
            && a.breakpoints().iter().zip(b.breakpoints()).all(|(u, v)| (u - v).abs() < 1e-8 * (1.0 + u.abs()))
    }

    #[test]
    fn fast_path_matches_refits() {
        for seed in 0..4 {
            let data = random_data(20, seed);
            let FullStrategy::Grid(grid) = FullStrategy::grid_around(data.ys(), 3.0, 101) else { unreachable!() };
            for inner in [
                RegressorSpec::ols(),
                RegressorSpec::Krr { gamma: 1.0, lambda: 0.2 },
                RegressorSpec::KernelSmoother { bandwidth: 0.6, trim_lo: -1.0, trim_hi: 2.0 },
            ] {
                let fast = full_rdps_deleted(&data, &inner, 0.1, &[0.4], &FullStrategy::Grid(grid.clone())).unwrap();
                let slow = brute(&data, &inner, 0.1, &[0.4], &grid);
                assert!(close(fast.lower(), slow.lower()) && close(fast.upper(), slow.upper()), "seed {seed} {inner:?}");
            }
        }
    }

    #[test]
    fn zero_trim_is_plain_grid() {
        let data = random_data(15, 2);
        let strat = FullStrategy::default_grid(data.ys());
        let a = full_rdps_deleted(&data, &RegressorSpec::ols(), 0.0, &[0.1], &strat).unwrap();
        let b = full_rdps(&data, &RegressorSpec::ols(), &[0.1], &strat).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn extreme_candidates_are_deleted() {
        // once y' is extreme it is trimmed and the refit no longer moves
        let data = random_data(30, 6);
        let inner = RegressorSpec::ols();
        let f1 = deleted_fit(&data.augmented(&[0.0], 1e3), &inner, 0.05).unwrap();
        let f2 = deleted_fit(&data.augmented(&[0.0], 1e4), &inner, 0.05).unwrap();
        for i in 0..=30 {
            assert!((f1.fitted()[i] - f2.fitted()[i]).abs() < 1e-9);
        }
        let ps = full_rdps_deleted(&data, &inner, 0.05, &[0.0], &FullStrategy::default_grid(data.ys())).unwrap();
        assert!(ps.thickness() < 1.0);
    }

    #[test]
    fn generic_inner_uses_refits() {
        let data = random_data(12, 3);
        let inner = RegressorSpec::QuantileSgd(SgdConfig::new(0.5, StepSchedule::InvSqrt(0.5), 2, 1));
        let FullStrategy::Grid(grid) = FullStrategy::grid_around(data.ys(), 3.0, 41) else { unreachable!() };
        let a = full_rdps_deleted(&data, &inner, 0.1, &[0.2], &FullStrategy::Grid(grid.clone())).unwrap();
        assert_eq!(a, brute(&data, &inner, 0.1, &[0.2], &grid));
    }

    #[test]
    fn only_grid_is_supported() {
        let data = random_data(12, 3);
        assert!(full_rdps_deleted(&data, &RegressorSpec::ols(), 0.1, &[0.0], &FullStrategy::LinearExact).is_err());
    }
}
