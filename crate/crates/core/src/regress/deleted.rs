use super::{fit, FittedRegressor, Model, RegressorSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Number of samples removed at trim fraction `q`: `⌈q n⌉`.
pub fn trim_count(q: f64, n: usize) -> usize {
    ((q * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Indices kept after dropping the `trim_count` largest absolute
/// residuals. Among ties the later index is dropped first.
pub(crate) fn survivors(residuals: &[f64], q: f64) -> Result<Vec<usize>> {
    let n = residuals.len();
    let k = trim_count(q, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        residuals[j]
            .abs()
            .partial_cmp(&residuals[i].abs())
            .unwrap()
            .then(j.cmp(&i))
    });
    let mut keep: Vec<usize> = order[k.min(n)..].to_vec();
    keep.sort_unstable();
    if keep.len() < 2 {
        return Err(Error::TooFewSurvivors {
            survivors: keep.len(),
        });
    }
    Ok(keep)
}

/// Fit `inner`, drop the `⌈q n⌉` samples with the largest absolute
/// residuals and refit on the rest. Predictions and residuals refer to the
/// full dataset.
pub fn deleted_fit(data: &Dataset, inner: &RegressorSpec, q: f64) -> Result<FittedRegressor> {
    RegressorSpec::deleted(inner.clone(), q).validate()?;
    let first = fit(inner, data)?;
    if trim_count(q, data.len()) == 0 {
        return Ok(first);
    }
    let keep = survivors(first.residuals(), q)?;
    let refit = fit(inner, &data.subset(&keep))?;
    let model: Model = refit.model().clone();
    Ok(FittedRegressor::new(model, data, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_data;

    #[test]
    fn counts() {
        assert_eq!(trim_count(0.0, 10), 0);
        assert_eq!(trim_count(0.1, 10), 1);
        assert_eq!(trim_count(0.2, 5), 1);
        assert_eq!(trim_count(0.05, 101), 6);
        assert_eq!(trim_count(0.3, 10), 3);
    }

    #[test]
    fn zero_fraction_is_inner_fit() {
        let data = random_data(12, 4);
        let a = deleted_fit(&data, &RegressorSpec::ols(), 0.0).unwrap();
        let b = fit(&RegressorSpec::ols(), &data).unwrap();
        assert_eq!(a.fitted(), b.fitted());
    }

    #[test]
    fn outlier_is_removed() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let mut y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        y[6] = 100.0;
        let data = Dataset::univariate(&x, &y).unwrap();
        let f = deleted_fit(&data, &RegressorSpec::ols(), 0.1).unwrap();
        for v in [-3.0, 0.5, 6.0, 20.0] {
            assert!((f.predict(&[v]) - (2.0 * v + 1.0)).abs() < 1e-9);
        }
        assert!((f.residuals()[6] - (100.0 - 13.0)).abs() < 1e-9);
    }

    #[test]
    fn ties_drop_the_latest_index() {
        assert_eq!(survivors(&[1.0, -1.0, 1.0, -1.0, 1.0], 0.2).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(survivors(&[1.0, 3.0, -3.0, 0.5], 0.25).unwrap(), vec![0, 1, 3]);
    }

    #[test]
    fn too_few_survivors() {
        let data = random_data(3, 1);
        assert!(matches!(
            deleted_fit(&data, &RegressorSpec::Ols { intercept_only: true }, 0.5),
            Err(Error::TooFewSurvivors { survivors: 1 })
        ));
    }

    #[test]
    fn permutation_invariance() {
        let data = random_data(20, 13);
        let mut perm: Vec<usize> = (0..20).collect();
        crate::rng::SimRng::new(&[5]).shuffle(&mut perm);
        let shuffled = data.subset(&perm);
        for inner in [
            RegressorSpec::ols(),
            RegressorSpec::Krr {
                gamma: 1.0,
                lambda: 0.1,
            },
        ] {
            let a = deleted_fit(&data, &inner, 0.15).unwrap();
            let b = deleted_fit(&shuffled, &inner, 0.15).unwrap();
            for k in 0..=20 {
                let x = [-3.0 + 0.3 * k as f64];
                assert!((a.predict(&x) - b.predict(&x)).abs() < 1e-9);
            }
        }
    }
}
