use super::{atoms_from_fitted, RankEnvelope};
use crate::data::Dataset;
use crate::error::Result;
use crate::regress::{pass_order, sgd_update, with_intercept, SgdConfig};
use crate::stepfn::PredictiveSystem;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Final parameters of one pass in which the new sample's indicator is
/// forced to `above`, and the threshold `β_{(j-1)}ᵀx_new` it is compared to.
struct Pass {
    threshold: f64,
    beta: [Vec<f64>; 2],
}

fn run_pass(rows: &[Vec<f64>], ys: &[f64], cfg: &SgdConfig, pass: usize) -> Pass {
    let n = ys.len();
    let order = pass_order(cfg.seed, pass, n + 1);
    let j = order.iter().position(|&i| i == n).expect("new sample is visited");
    let mut beta = vec![0.0; rows[0].len()];
    for (t, &i) in order[..j].iter().enumerate() {
        let above = ys[i] > dot(&beta, &rows[i]);
        sgd_update(&mut beta, &rows[i], above, cfg.tau, cfg.schedule.eta(t + 1));
    }
    let threshold = dot(&beta, &rows[n]);
    let branch = |above: bool| {
        let mut b = beta.clone();
        sgd_update(&mut b, &rows[n], above, cfg.tau, cfg.schedule.eta(j + 1));
        for (t, &i) in order.iter().enumerate().skip(j + 1) {
            let above = ys[i] > dot(&b, &rows[i]);
            sgd_update(&mut b, &rows[i], above, cfg.tau, cfg.schedule.eta(t + 1));
        }
        b
    };
    Pass {
        threshold,
        beta: [branch(false), branch(true)],
    }
}

/// Full residual-distribution system for subgradient quantile regression
/// without refitting per candidate. Within a pass the candidate `y'` only
/// enters through one indicator, so each pass has two possible outcomes and
/// the averaged fit is constant between consecutive pass thresholds.
pub fn quantile_sgd_full_rdps(data: &Dataset, cfg: &SgdConfig, x_new: &[f64]) -> Result<PredictiveSystem> {
    cfg.validate()?;
    data.check_covariate(x_new)?;
    let n = data.len();
    let mut rows: Vec<Vec<f64>> = data.xs().map(with_intercept).collect();
    rows.push(with_intercept(x_new));
    let ys = data.ys();
    let passes: Vec<Pass> = (0..cfg.n_passes).map(|p| run_pass(&rows, ys, cfg, p)).collect();

    let mut cuts: Vec<f64> = passes.iter().map(|p| p.threshold).collect();
    cuts.sort_by(f64::total_cmp);
    let mut env = RankEnvelope::new(n + 1);
    // regime r: y' ∈ (cuts[r-1], cuts[r]], with ±∞ at the ends
    for r in 0..=cuts.len() {
        let lo = if r == 0 { f64::NEG_INFINITY } else { cuts[r - 1] };
        let hi = if r == cuts.len() { f64::INFINITY } else { cuts[r] };
        if !(lo < hi) {
            continue;
        }
        let p_dim = rows[0].len();
        let mut beta = vec![0.0; p_dim];
        for p in &passes {
            // the indicator 1{y' > threshold} throughout the regime
            let b = &p.beta[(p.threshold <= lo) as usize];
            for (a, v) in beta.iter_mut().zip(b) {
                *a += v;
            }
        }
        for a in &mut beta {
            *a /= passes.len() as f64;
        }
        let fitted: Vec<f64> = rows.iter().map(|x| dot(&beta, x)).collect();
        let sup = atoms_from_fitted(ys, &fitted, lo);
        let inf = atoms_from_fitted(ys, &fitted, hi);
        env.push(sup, inf);
    }
    env.into_system()
}
