//! Seedable randomness and samplers for every distribution in the model.

mod ars;
mod slice;
mod stream;

pub use ars::{ars_sample, ArsTarget};
pub use slice::slice_sample;
pub use stream::RandomStream;

use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{domain, finite, positive, Result};

/// Gaussian draw with precision `s_precision`.
pub fn draw_gaussian(rs: &mut RandomStream, mu: f64, s_precision: f64) -> Result<f64> {
    finite("gaussian mean", mu)?;
    positive("gaussian precision", s_precision)?;
    Ok(mu + standard_normal(rs) / s_precision.sqrt())
}

#[inline]
pub(crate) fn standard_normal(rs: &mut RandomStream) -> f64 {
    StandardNormal.sample(rs)
}

/// Gamma draw with shape `m` and rate `r`.
pub fn draw_gamma(rs: &mut RandomStream, m: f64, r: f64) -> Result<f64> {
    positive("gamma shape", m)?;
    positive("gamma rate", r)?;
    Ok(gamma_unchecked(rs, m, r))
}

#[inline]
pub(crate) fn gamma_unchecked(rs: &mut RandomStream, m: f64, r: f64) -> f64 {
    // rand_distr takes a scale; ours is a rate.
    let g = Gamma::new(m, 1.0).expect("validated shape");
    g.sample(rs) / r
}

/// `ln` of a Gamma(m, 1) draw, accurate for shapes well below one where the
/// draw itself may underflow.
pub(crate) fn log_gamma_variate(rs: &mut RandomStream, m: f64) -> f64 {
    if m >= 1.0 {
        gamma_unchecked(rs, m, 1.0).ln()
    } else {
        // G(m) = G(m + 1) U^(1/m)
        gamma_unchecked(rs, m + 1.0, 1.0).ln() + open_uniform(rs).ln() / m
    }
}

/// One-dimensional Wishart draw (`S^(m-1) exp(-R S)`), i.e. a Gamma with
/// shape `m` and rate `r_scale`.
pub fn draw_wishart_1d(rs: &mut RandomStream, m: f64, r_scale: f64) -> Result<f64> {
    positive("wishart shape", m)?;
    positive("wishart scale", r_scale)?;
    Ok(gamma_unchecked(rs, m, r_scale))
}

/// Dirichlet draw. Components are normalized in the log domain so that very
/// small concentrations do not produce exact zeros.
pub fn draw_dirichlet(rs: &mut RandomStream, eta: &[f64]) -> Result<Vec<f64>> {
    if eta.is_empty() {
        return Err(crate::Error::Input("dirichlet with no components".into()));
    }
    for &e in eta {
        positive("dirichlet concentration", e)?;
    }
    Ok(dirichlet_unchecked(rs, eta))
}

pub(crate) fn dirichlet_unchecked(rs: &mut RandomStream, eta: &[f64]) -> Vec<f64> {
    let logs: Vec<f64> = eta.iter().map(|&e| log_gamma_variate(rs, e)).collect();
    let norm = crate::special::log_sum_exp(&logs);
    let mut p: Vec<f64> = logs.iter().map(|l| (l - norm).exp()).collect();
    // Re-normalize so the sum is 1 to within rounding.
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|w| *w /= total);
    p
}

/// Index drawn with probability proportional to `weights`.
pub fn draw_categorical(rs: &mut RandomStream, weights: &[f64]) -> Result<usize> {
    let mut total = 0.0;
    for &w in weights {
        if !(w >= 0.0) || w.is_infinite() {
            return Err(domain("categorical weight", w));
        }
        total += w;
    }
    if !(total > 0.0) {
        return Err(domain("categorical total weight", total));
    }
    let mut u = rs.random::<f64>() * total;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
            if u < w {
                return Ok(i);
            }
            u -= w;
        }
    }
    Ok(last_positive)
}

/// Categorical draw from unnormalized log-weights (overwritten in place by
/// the normalized probabilities).
pub(crate) fn categorical_from_logs(rs: &mut RandomStream, logs: &mut [f64]) -> usize {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for l in logs.iter_mut() {
        *l = (*l - max).exp();
        total += *l;
    }
    let mut u = rs.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in logs.iter().enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return i;
            }
            u -= w;
        }
    }
    last
}

/// Beta draw via two Gamma variates.
pub(crate) fn beta_unchecked(rs: &mut RandomStream, a: f64, b: f64) -> f64 {
    let la = log_gamma_variate(rs, a);
    let lb = log_gamma_variate(rs, b);
    let hi = la.max(lb);
    let ea = (la - hi).exp();
    let eb = (lb - hi).exp();
    ea / (ea + eb)
}

/// Uniform on the open interval (0, 1).
#[inline]
pub(crate) fn open_uniform(rs: &mut RandomStream) -> f64 {
    loop {
        let u: f64 = rs.random();
        if u > 0.0 {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma_logpdf;
    use asi_testkit::{integrate, ks_test, mean_se, normal_cdf};
    use std::vec::Vec;

    fn gamma_cdf(m: f64, r: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| {
            if x <= 0.0 {
                0.0
            } else {
                integrate(|t| gamma_logpdf(t, m, r).unwrap().exp(), 0.0, x, 1e-13).min(1.0)
            }
        }
    }

    #[test]
    fn dirichlet_is_on_simplex() {
        let mut rs = RandomStream::new(1, 0);
        for eta in [&[0.3, 0.3, 0.3][..], &[10.0, 0.01], &[1.0; 30]] {
            for _ in 0..1000 {
                let p = draw_dirichlet(&mut rs, eta).unwrap();
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(p.iter().all(|&w| w >= 0.0));
            }
        }
    }

    #[test]
    fn gamma_mean_matches_shape_over_rate() {
        let mut rs = RandomStream::new(7, 3);
        let xs: Vec<f64> = (0..1_000_000).map(|_| draw_gamma(&mut rs, 3.0, 2.0).unwrap()).collect();
        let (mean, se) = mean_se(&xs);
        assert!((mean - 1.5).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn categorical_degenerate_and_errors() {
        let mut rs = RandomStream::new(2, 0);
        for _ in 0..1000 {
            assert_eq!(draw_categorical(&mut rs, &[0.0, 0.0, 1.0]).unwrap(), 2);
        }
        assert!(draw_categorical(&mut rs, &[0.0, 0.0]).is_err());
        assert!(draw_categorical(&mut rs, &[1.0, -0.5]).is_err());
        assert!(draw_categorical(&mut rs, &[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn categorical_frequencies() {
        let mut rs = RandomStream::new(5, 0);
        let w = [1.0, 2.0, 7.0];
        let mut counts = [0usize; 3];
        let n = 200_000;
        for _ in 0..n {
            counts[draw_categorical(&mut rs, &w).unwrap()] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let p = w[i] / 10.0;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - p).abs() < 4.0 * se);
        }
    }

    #[test]
    fn samplers_match_densities_ks() {
        let n = 100_000;
        let mut rs = RandomStream::new(11, 0);
        for &(mu, s) in &[(0.0, 1.0), (-2.0, 0.25), (3.0, 40.0)] {
            let xs: Vec<f64> = (0..n).map(|_| draw_gaussian(&mut rs, mu, s).unwrap()).collect();
            let p = ks_test(&xs, |x| normal_cdf((x - mu) * s.sqrt()));
            assert!(p > 1e-3, "gaussian({mu},{s}) p={p}");
        }
        for &(m, r) in &[(0.4, 1.0), (3.0, 2.0), (25.0, 0.5)] {
            let xs: Vec<f64> = (0..n).map(|_| draw_gamma(&mut rs, m, r).unwrap()).collect();
            let cdf = gamma_cdf(m, r);
            let mut sorted = xs.clone();
            sorted.sort_by(f64::total_cmp);
            // Cumulative integration between consecutive order statistics.
            let mut acc = cdf(sorted[0]);
            let mut table = Vec::with_capacity(n);
            table.push(acc);
            for w in sorted.windows(2) {
                acc += integrate(|t| gamma_logpdf(t, m, r).unwrap().exp(), w[0], w[1], 1e-14);
                table.push(acc);
            }
            let mut idx = 0;
            let p = ks_test(&sorted, |_| {
                let v = table[idx];
                idx += 1;
                v
            });
            assert!(p > 1e-3, "gamma({m},{r}) p={p}");
        }
        let xs: Vec<f64> = (0..n).map(|_| draw_wishart_1d(&mut rs, 2.0, 3.0).unwrap()).collect();
        let (mean, se) = mean_se(&xs);
        assert!((mean - 2.0 / 3.0).abs() < 4.0 * se);
    }

    #[test]
    fn invalid_parameters() {
        let mut rs = RandomStream::new(0, 0);
        assert!(draw_gaussian(&mut rs, 0.0, 0.0).is_err());
        assert!(draw_gamma(&mut rs, -1.0, 1.0).is_err());
        assert!(draw_gamma(&mut rs, 1.0, 0.0).is_err());
        assert!(draw_dirichlet(&mut rs, &[]).is_err());
        assert!(draw_dirichlet(&mut rs, &[1.0, 0.0]).is_err());
        assert!(draw_wishart_1d(&mut rs, 1.0, f64::INFINITY).is_err());
    }
}
