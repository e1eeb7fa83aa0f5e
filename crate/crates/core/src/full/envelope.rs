use rayon::prelude::*;

use super::{FullStrategy, SLOPE_EPS};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regress::{affine_response, fit, RegressorSpec};
use crate::stepfn::StepFn;

/// Range over `y'` of each prediction difference `ŷ'_{n+1} - ŷ'_i`, and the
/// outer bounds it implies for any full residual-distribution system.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub inf: Vec<f64>,
    pub sup: Vec<f64>,
    /// `false` when the ranges come from a finite grid of refits.
    pub exact: bool,
    /// `Π_u(y) ≤ (1 + #{y_i + inf_i ≤ y}) / (n+1)`.
    pub outer_upper: StepFn,
    /// `Π_ℓ(y) ≥ #{y_i + sup_i ≤ y} / (n+1)`.
    pub outer_lower: StepFn,
    /// Some difference is unbounded, so the bounds reach 0 or 1 away from
    /// the data.
    pub uninformative: bool,
}

pub fn informativeness_envelope(data: &Dataset, spec: &RegressorSpec, x_new: &[f64]) -> Result<EnvelopeReport> {
    spec.validate()?;
    data.check_covariate(x_new)?;
    let n = data.len();
    let (inf, sup, exact) = match affine_response(spec, data, x_new) {
        Ok(resp) => {
            let (lo, hi) = resp.clip.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
            let (mut inf, mut sup) = (Vec::with_capacity(n), Vec::with_capacity(n));
            for i in 0..n {
                let (s, c) = resp.difference(i);
                if s.abs() <= SLOPE_EPS {
                    inf.push(c);
                    sup.push(c);
                } else {
                    let at = |z: f64| if z.is_infinite() { z * s.signum() } else { c + s * z };
                    let (u, v) = (at(lo), at(hi));
                    inf.push(u.min(v));
                    sup.push(u.max(v));
                }
            }
            (inf, sup, true)
        }
        Err(Error::Capability(_)) => {
            let FullStrategy::Grid(grid) = FullStrategy::default_grid(data.ys()) else {
                unreachable!()
            };
            let diffs: Vec<Vec<f64>> = grid
                .par_iter()
                .map(|&yp| {
                    let f = fit(spec, &data.augmented(x_new, yp))?;
                    let p = f.fitted();
                    Ok((0..n).map(|i| p[n] - p[i]).collect())
                })
                .collect::<Result<_>>()?;
            let mut inf = vec![f64::INFINITY; n];
            let mut sup = vec![f64::NEG_INFINITY; n];
            for d in diffs {
                for i in 0..n {
                    inf[i] = inf[i].min(d[i]);
                    sup[i] = sup[i].max(d[i]);
                }
            }
            (inf, sup, false)
        }
        Err(e) => return Err(e),
    };
    let ys = data.ys();
    let lows: Vec<f64> = ys.iter().zip(&inf).map(|(y, d)| y + d).collect();
    let highs: Vec<f64> = ys.iter().zip(&sup).map(|(y, d)| y + d).collect();
    let d = (n + 1) as u32;
    let uninformative = inf.iter().chain(&sup).any(|v| v.is_infinite());
    Ok(EnvelopeReport {
        outer_upper: StepFn::counting(&lows, 1, d)?,
        outer_lower: StepFn::counting(&highs, 0, d)?,
        inf,
        sup,
        exact,
        uninformative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::full::full_rdps;
    use crate::regress::{SgdConfig, StepSchedule};
    use crate::testutil::random_data;

    #[test]
    fn ols_is_uninformative() {
        let r = informativeness_envelope(&random_data(15, 1), &RegressorSpec::ols(), &[0.4]).unwrap();
        assert!(r.exact && r.uninformative);
    }

    #[test]
    fn clipped_smoother_is_informative() {
        let spec = RegressorSpec::KernelSmoother {
            bandwidth: 1.0,
            trim_lo: -2.0,
            trim_hi: 2.0,
        };
        let data = random_data(15, 2);
        let r = informativeness_envelope(&data, &spec, &[0.4]).unwrap();
        assert!(!r.uninformative);
        // the outer envelope contains the exact system
        let ps = full_rdps(&data, &spec, &[0.4], &FullStrategy::LinearExact).unwrap();
        let mut cuts: Vec<f64> = [ps.upper(), ps.lower(), &r.outer_upper, &r.outer_lower]
            .iter()
            .flat_map(|f| f.breakpoints().to_vec())
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let mut probes: Vec<f64> = cuts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        probes.extend([cuts[0] - 1.0, cuts[cuts.len() - 1] + 1.0]);
        for y in probes {
            assert!(ps.upper().level_at(y) <= r.outer_upper.level_at(y));
            assert!(r.outer_lower.level_at(y) <= ps.lower().level_at(y));
        }
    }

    #[test]
    fn equal_slopes_give_finite_envelope() {
        let r = informativeness_envelope(
            &random_data(10, 3),
            &RegressorSpec::Ols { intercept_only: true },
            &[0.0],
        )
        .unwrap();
        assert!(!r.uninformative);
        assert!(r.inf.iter().zip(&r.sup).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn generic_backends_use_a_grid() {
        let spec = RegressorSpec::QuantileSgd(SgdConfig::new(0.5, StepSchedule::InvSqrt(0.5), 1, 0));
        let r = informativeness_envelope(&random_data(10, 3), &spec, &[0.0]).unwrap();
        assert!(!r.exact && !r.uninformative);
    }
}
