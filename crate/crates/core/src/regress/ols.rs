use super::{FittedRegressor, LinearKind, Model};
use crate::data::Dataset;
use crate::error::Result;
use crate::linalg;

/// Least squares with an intercept column (last coefficient).
pub fn fit_ols(data: &Dataset, intercept_only: bool) -> Result<FittedRegressor> {
    let rows: Vec<&[f64]> = data.xs().collect();
    let x = linalg::design(&rows, intercept_only);
    let chol = linalg::gram_factor(&x)?;
    let y = nalgebra::DVector::from_column_slice(data.ys());
    let coef = chol.solve(&(x.transpose() * y));
    Ok(FittedRegressor::new(
        Model::Linear {
            coef: coef.iter().copied().collect(),
            intercept_only,
        },
        data,
        Some(LinearKind::Ols { intercept_only }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::testutil::random_data;

    #[test]
    fn exact_line() {
        let data = Dataset::univariate(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        let f = fit_ols(&data, false).unwrap();
        assert!((f.predict(&[3.0]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn intercept_only_hat_is_averaging() {
        let data = Dataset::univariate(&[0.0, 4.0, 9.0], &[1.0, 2.0, 6.0]).unwrap();
        let h = fit_ols(&data, true).unwrap().hat_matrix().unwrap();
        for v in h.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        // normal equations: Xᵀ ε = 0 for both columns
        let data = random_data(20, 11);
        let f = fit_ols(&data, false).unwrap();
        let dot_x: f64 = f.residuals().iter().zip(data.ys()).enumerate().map(|(i, (e, _))| e * data.x(i)[0]).sum();
        let dot_1: f64 = f.residuals().iter().sum();
        assert!(dot_x.abs() < 1e-8);
        assert!(dot_1.abs() < 1e-8);
    }

    #[test]
    fn hat_matrix_properties() {
        let data = random_data(25, 5);
        let h = fit_ols(&data, false).unwrap().hat_matrix().unwrap();
        assert!((&h - h.transpose()).amax() < 1e-8);
        assert!((&h * &h - &h).amax() < 1e-8);
        assert!((h.trace() - 2.0).abs() < 1e-8);
        assert!(h.diagonal().iter().all(|d| (0.0..=1.0).contains(d)));
    }

    #[test]
    fn rank_deficiency_is_named() {
        let data = Dataset::univariate(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        match fit_ols(&data, false) {
            Err(Error::RankDeficient { rank, columns }) => {
                assert_eq!((rank, columns), (1, 2));
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }
}
