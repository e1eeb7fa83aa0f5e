//! Small dense helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Reciprocal condition number below which a system is treated as singular.
pub const RCOND_MIN: f64 = 1e-12;

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

pub fn laplacian_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-euclidean(a, b) / gamma).exp()
}

/// Design matrix with the intercept column last (or only the intercept).
pub fn design(rows: &[&[f64]], intercept_only: bool) -> DMatrix<f64> {
    let p = if intercept_only { 1 } else { rows[0].len() + 1 };
    DMatrix::from_fn(rows.len(), p, |i, j| if j + 1 == p { 1.0 } else { rows[i][j] })
}

pub fn kernel_matrix(a: &[&[f64]], b: &[&[f64]], gamma: f64) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| laplacian_kernel(a[i], b[j], gamma))
}

/// Cholesky factor of a symmetric positive definite matrix. The condition
/// estimate is the squared ratio of extreme diagonal entries of the factor.
pub fn cholesky(m: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(m).ok_or(Error::Singular { rcond: 0.0 })?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d.abs()), hi.max(d.abs())));
    let rcond = (lo / hi).powi(2);
    if !(rcond >= RCOND_MIN) {
        return Err(Error::Singular { rcond });
    }
    Ok(chol)
}

/// Factor of `XᵀX` for a least-squares design, rejecting rank deficiency.
pub fn gram_factor(x: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let xtx = x.transpose() * x;
    let eig = SymmetricEigen::new(xtx.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rank = eig.eigenvalues.iter().filter(|v| **v > max * RCOND_MIN).count();
    if max == 0.0 || rank < xtx.ncols() {
        return Err(Error::RankDeficient {
            rank,
            columns: xtx.ncols(),
        });
    }
    cholesky(xtx)
}
