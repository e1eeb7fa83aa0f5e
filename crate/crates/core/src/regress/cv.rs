use super::fit_krr;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Fold label of each sample: a seeded shuffle dealt round-robin.
pub fn fold_assignment(n: usize, k_folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    SimRng::new(&[seed, n as u64, k_folds as u64]).shuffle(&mut order);
    let mut folds = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        folds[i] = pos % k_folds;
    }
    folds
}

fn cv_error(data: &Dataset, folds: &[usize], k_folds: usize, gamma: f64, lambda: f64) -> Result<f64> {
    let mut sse = 0.0;
    for k in 0..k_folds {
        let train: Vec<usize> = (0..data.len()).filter(|&i| folds[i] != k).collect();
        let f = fit_krr(&data.subset(&train), gamma, lambda)?;
        for i in (0..data.len()).filter(|&i| folds[i] == k) {
            sse += (data.y(i) - f.predict(data.x(i))).powi(2);
        }
    }
    Ok(sse / data.len() as f64)
}

/// Kernel ridge penalty with the smallest mean squared out-of-fold error.
/// Ties go to the larger penalty.
pub fn cross_validate_lambda(
    data: &Dataset,
    gamma: f64,
    candidates: &[f64],
    k_folds: usize,
    seed: u64,
) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::Empty("lambda candidates"));
    }
    if k_folds < 2 || data.len() < k_folds {
        return Err(Error::invalid("k_folds", k_folds, "need 2 <= k_folds <= n"));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let folds = fold_assignment(data.len(), k_folds, seed);
    let mut best = (f64::INFINITY, sorted[0]);
    for &lambda in &sorted {
        let err = cv_error(data, &folds, k_folds, gamma, lambda)?;
        if err < best.0 {
            best = (err, lambda);
        }
    }
    Ok(best.1)
}
