//! Covariate–outcome datasets.

use crate::error::{Error, Result};

/// One covariate–outcome pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Sample { x, y }
    }
}

/// Ordered samples sharing a covariate dimension. Covariates are stored
/// row-major in one buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn from_flat(dim: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", dim, "covariates need at least one coordinate"));
        }
        if y.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if x.len() != dim * y.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * y.len(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariates"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("outcomes"));
        }
        Ok(Dataset { dim, x, y })
    }

    pub fn from_samples(samples: &[Sample]) -> Result<Self> {
        let first = samples.first().ok_or(Error::Empty("dataset"))?;
        let dim = first.x.len();
        let mut x = Vec::with_capacity(dim * samples.len());
        for s in samples {
            if s.x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.x.len(),
                });
            }
            x.extend_from_slice(&s.x);
        }
        Self::from_flat(dim, x, samples.iter().map(|s| s.y).collect())
    }

    /// One-dimensional covariates.
    pub fn univariate(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                found: x.len(),
            });
        }
        Self::from_flat(1, x.to_vec(), y.to_vec())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn y(&self, i: usize) -> f64 {
        self.y[i]
    }

    pub fn ys(&self) -> &[f64] {
        &self.y
    }

    pub fn xs(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.dim)
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample::new(self.x(i).to_vec(), self.y[i])
    }

    pub fn check_covariate(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariate"));
        }
        Ok(())
    }

    /// Samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            x.extend_from_slice(self.x(i));
        }
        Dataset {
            dim: self.dim,
            x,
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// This dataset with `(x, y)` appended as the last sample.
    pub fn augmented(&self, x: &[f64], y: f64) -> Dataset {
        let mut out = self.clone();
        out.x.extend_from_slice(x);
        out.y.push(y);
        out
    }

    /// Same covariates with replaced outcomes.
    pub fn with_outcomes(&self, y: Vec<f64>) -> Result<Dataset> {
        Self::from_flat(self.dim, self.x.clone(), y)
    }

    pub fn split(&self, split: SplitIndex) -> Result<(Dataset, Dataset)> {
        let n_est = split.estimation_size();
        if n_est >= self.len() {
            return Err(Error::invalid(
                "split",
                n_est,
                "estimation size must leave at least one calibration sample",
            ));
        }
        let est: Vec<usize> = (0..n_est).collect();
        let cal: Vec<usize> = (n_est..self.len()).collect();
        Ok((self.subset(&est), self.subset(&cal)))
    }
}

/// Positional estimation/calibration split: the first `N` samples estimate,
/// the rest calibrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitIndex(usize);

impl SplitIndex {
    pub fn new(estimation_size: usize) -> Result<Self> {
        if estimation_size == 0 {
            return Err(Error::invalid("split", 0, "estimation set must be nonempty"));
        }
        Ok(SplitIndex(estimation_size))
    }

    /// `N = round(fraction * n)`, clamped to `[1, n - 1]`.
    pub fn from_fraction(fraction: f64, n: usize) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) || n < 2 {
            return Err(Error::invalid("split fraction", fraction, "must lie in (0, 1) with n >= 2"));
        }
        let n_est = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
        Ok(SplitIndex(n_est))
    }

    pub fn estimation_size(&self) -> usize {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_access() {
        let d = Dataset::univariate(&[0.0, 1.0, 2.0], &[3.0, 4.0, 5.0]).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.x(1), &[1.0]);
        let aug = d.augmented(&[7.0], 8.0);
        assert_eq!(aug.len(), 4);
        assert_eq!(aug.sample(3), Sample::new(vec![7.0], 8.0));
        let (est, cal) = d.split(SplitIndex::new(2).unwrap()).unwrap();
        assert_eq!(est.ys(), &[3.0, 4.0]);
        assert_eq!(cal.ys(), &[5.0]);
        assert!(d.split(SplitIndex::new(3).unwrap()).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Dataset::univariate(&[], &[]).is_err());
        assert!(Dataset::univariate(&[f64::NAN], &[1.0]).is_err());
        assert!(Dataset::from_flat(2, vec![1.0, 2.0, 3.0], vec![1.0, 2.0]).is_err());
        let mixed = [Sample::new(vec![1.0], 0.0), Sample::new(vec![1.0, 2.0], 0.0)];
        assert!(Dataset::from_samples(&mixed).is_err());
        assert!(SplitIndex::new(0).is_err());
    }
}
