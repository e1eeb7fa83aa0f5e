use crate::data::Dataset;
use crate::rng::SimRng;

/// `x ~ N(0, 1)`, `y = x + N(0, 1)`.
pub(crate) fn random_data(n: usize, seed: u64) -> Dataset {
    let mut rng = SimRng::new(&[seed, 999]);
    let x: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    let y: Vec<f64> = x.iter().map(|v| v + rng.standard_normal()).collect();
    Dataset::univariate(&x, &y).unwrap()
}

pub(crate) fn random_data_dim(n: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = SimRng::new(&[seed, 998]);
    let x: Vec<f64> = (0..n * dim).map(|_| rng.standard_normal()).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| x[i * dim..(i + 1) * dim].iter().sum::<f64>() + rng.standard_normal())
        .collect();
    Dataset::from_flat(dim, x, y).unwrap()
}
