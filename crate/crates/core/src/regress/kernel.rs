use super::{FittedRegressor, LinearKind, Model};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg;

/// Kernel ridge regression, `ŷ(x) = k(x)ᵀ (K + λI)⁻¹ y` with the Laplacian
/// kernel `exp(-‖x - x'‖ / gamma)` and no intercept.
pub fn fit_krr(data: &Dataset, gamma: f64, lambda: f64) -> Result<FittedRegressor> {
    super::RegressorSpec::Krr { gamma, lambda }.validate()?;
    let rows: Vec<&[f64]> = data.xs().collect();
    let mut k = linalg::kernel_matrix(&rows, &rows, gamma);
    for i in 0..rows.len() {
        k[(i, i)] += lambda;
    }
    let chol = linalg::cholesky(k)?;
    let weights = chol.solve(&nalgebra::DVector::from_column_slice(data.ys()));
    Ok(FittedRegressor::new(
        Model::Kernel {
            centers: data.clone(),
            weights: weights.iter().copied().collect(),
            gamma,
        },
        data,
        Some(LinearKind::Krr { gamma, lambda }),
    ))
}

/// Median of the pairwise Euclidean distances between covariates.
pub fn median_pairwise_distance(data: &Dataset) -> Result<f64> {
    let rows: Vec<&[f64]> = data.xs().collect();
    let mut d: Vec<f64> = Vec::with_capacity(rows.len() * rows.len().saturating_sub(1) / 2);
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            d.push(linalg::euclidean(rows[i], rows[j]));
        }
    }
    if d.is_empty() {
        return Err(Error::Empty("pairwise distances need two samples"));
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = d.len();
    let med = if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    };
    if med <= 0.0 {
        return Err(Error::invalid("median distance", med, "covariates coincide"));
    }
    Ok(med)
}
