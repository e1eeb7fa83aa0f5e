use super::{FittedRegressor, LinearKind, Model};
use crate::data::Dataset;
use crate::error::Result;

/// Kernel-weighted average `Σ w_j clip(y_j) / Σ w_j`, `w_j = exp(-‖x - x_j‖ / bandwidth)`.
pub fn fit_kernel_smoother(
    data: &Dataset,
    bandwidth: f64,
    trim_lo: f64,
    trim_hi: f64,
) -> Result<FittedRegressor> {
    super::RegressorSpec::KernelSmoother {
        bandwidth,
        trim_lo,
        trim_hi,
    }
    .validate()?;
    let targets = data.ys().iter().map(|y| y.clamp(trim_lo, trim_hi)).collect();
    Ok(FittedRegressor::new(
        Model::Smoother {
            centers: data.clone(),
            targets,
            bandwidth,
        },
        data,
        Some(LinearKind::Smoother {
            bandwidth,
            lo: trim_lo,
            hi: trim_hi,
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let one = Dataset::univariate(&[0.0], &[3.0]).unwrap();
        let f = fit_kernel_smoother(&one, 1.0, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert_eq!(f.predict(&[17.0]), 3.0);

        let two = Dataset::univariate(&[-1.0, 1.0], &[0.0, 2.0]).unwrap();
        let f = fit_kernel_smoother(&two, 1.0, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!((f.predict(&[0.0]) - 1.0).abs() < 1e-15);

        let high = Dataset::univariate(&[0.0, 1.0], &[5.0, 5.0]).unwrap();
        let f = fit_kernel_smoother(&high, 1.0, f64::NEG_INFINITY, 1.0).unwrap();
        assert!((f.predict(&[0.5]) - 1.0).abs() < 1e-15);
        assert!(f.hat_matrix().is_none());
    }
}
