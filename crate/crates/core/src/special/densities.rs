use num_traits::Float;

use super::{lgamma, LN_2PI};
use crate::error::{domain, finite, positive, Result};

/// Gaussian log-density with precision `s_precision`.
pub fn gaussian_logpdf(x: f64, mu: f64, s_precision: f64) -> Result<f64> {
    finite("gaussian mean", mu)?;
    positive("gaussian precision", s_precision)?;
    if x.is_nan() {
        return Err(domain("gaussian argument", x));
    }
    Ok(gaussian_logpdf_unchecked(x, mu, s_precision))
}

#[inline]
pub(crate) fn gaussian_logpdf_unchecked(x: f64, mu: f64, s: f64) -> f64 {
    let d = x - mu;
    0.5 * (s.ln() - LN_2PI) - 0.5 * s * d * d
}

/// Gamma log-density with shape `m` and rate `r`. Zero density (`-inf`)
/// for `x <= 0`.
pub fn gamma_logpdf(x: f64, m: f64, r: f64) -> Result<f64> {
    positive("gamma shape", m)?;
    positive("gamma rate", r)?;
    if x.is_nan() {
        return Err(domain("gamma argument", x));
    }
    Ok(gamma_logpdf_unchecked(x, m, r))
}

#[inline]
pub(crate) fn gamma_logpdf_unchecked(x: f64, m: f64, r: f64) -> f64 {
    if !(x > 0.0) || x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    m * r.ln() - lgamma(m) + (m - 1.0) * x.ln() - r * x
}

/// One-dimensional Wishart log-density `R^m / Gamma(m) S^(m-1) exp(-R S)`.
///
/// The exponent carries no factor one half, so at dimension one this is the
/// Gamma density with shape `m` and rate `r_scale`.
pub fn wishart_logpdf_1d(s: f64, m: f64, r_scale: f64) -> Result<f64> {
    positive("wishart shape", m)?;
    positive("wishart scale", r_scale)?;
    if s.is_nan() {
        return Err(domain("wishart argument", s));
    }
    Ok(gamma_logpdf_unchecked(s, m, r_scale))
}

/// Dirichlet log-density with the `1/sqrt(C)` factor, i.e. the density with
/// respect to surface measure on the simplex embedded in `R^C`.
/// Returns `-inf` off the simplex.
pub fn dirichlet_logpdf(p: &[f64], eta: &[f64]) -> Result<f64> {
    if p.len() != eta.len() || p.is_empty() {
        return Err(crate::Error::Structure(alloc::format!(
            "dirichlet: {} weights for {} concentrations",
            p.len(),
            eta.len()
        )));
    }
    for &e in eta {
        positive("dirichlet concentration", e)?;
    }
    let total: f64 = p.iter().sum();
    if p.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(dirichlet_logpdf_unchecked(p, eta))
}

pub(crate) fn dirichlet_logpdf_unchecked(p: &[f64], eta: &[f64]) -> f64 {
    let c = p.len() as f64;
    let eta_sum: f64 = eta.iter().sum();
    let mut v = -0.5 * c.ln() + lgamma(eta_sum);
    for (&w, &e) in p.iter().zip(eta) {
        v += (e - 1.0) * w.ln() - lgamma(e);
    }
    v
}

/// Centered Student log-density in the model's parameterization:
/// `sqrt(s / 2pi) Gamma(m + 1/2) / Gamma(m) r^m / (r + s x^2 / 2)^(m + 1/2)`.
pub fn student_logpdf(x: f64, m: f64, r: f64, s: f64) -> Result<f64> {
    positive("student shape", m)?;
    positive("student rate", r)?;
    positive("student precision", s)?;
    if x.is_nan() {
        return Err(domain("student argument", x));
    }
    Ok(0.5 * (s.ln() - LN_2PI) + lgamma(m + 0.5) - lgamma(m) + m * r.ln()
        - (m + 0.5) * (r + 0.5 * s * x * x).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use asi_testkit::integrate;
    use std::vec::Vec;

    #[test]
    fn gaussian_at_origin() {
        let v = gaussian_logpdf(0.0, 0.0, 1.0).unwrap();
        assert!((v + 0.5 * LN_2PI).abs() < 1e-15);
        assert!(gaussian_logpdf(0.0, 0.0, 0.0).is_err());
        assert!(gaussian_logpdf(0.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn dirichlet_carries_root_c_factor() {
        // Standard Dirichlet(5,5) at (1/2, 1/2): Gamma(10)/Gamma(5)^2 * 2^-8
        let standard = lgamma(10.0) - 2.0 * lgamma(5.0) + 8.0 * 0.5_f64.ln();
        let v = dirichlet_logpdf(&[0.5, 0.5], &[5.0, 5.0]).unwrap();
        assert!((v - (standard - 0.5 * 2.0_f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_off_simplex_is_zero_density() {
        assert_eq!(dirichlet_logpdf(&[0.5, 0.6], &[1.0, 1.0]).unwrap(), f64::NEG_INFINITY);
        assert!(dirichlet_logpdf(&[0.5, 0.5], &[1.0]).is_err());
        assert!(dirichlet_logpdf(&[0.5, 0.5], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn gamma_support() {
        assert_eq!(gamma_logpdf(0.0, 2.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(gamma_logpdf(-1.0, 2.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert!(gamma_logpdf(1.0, 0.0, 1.0).is_err());
    }

    fn check_normalized<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, what: &str) {
        let v = integrate(|x| f(x).exp(), lo, hi, 1e-12);
        assert!((v - 1.0).abs() < 1e-6, "{what}: integral {v}");
    }

    #[test]
    fn densities_integrate_to_one_on_a_grid() {
        let grid: Vec<(f64, f64)> = (0..10).map(|i| (0.6 + 0.7 * i as f64, 0.3 + 0.45 * i as f64)).collect();
        for &(a, b) in &grid {
            check_normalized(|x| gaussian_logpdf(x, a - 3.0, b).unwrap(), f64::NEG_INFINITY, f64::INFINITY, "gaussian");
            check_normalized(|x| gamma_logpdf(x, a, b).unwrap(), 0.0, f64::INFINITY, "gamma");
            check_normalized(|x| wishart_logpdf_1d(x, a, b).unwrap(), 0.0, f64::INFINITY, "wishart");
            check_normalized(|x| student_logpdf(x, a, b, 1.0 + b).unwrap(), f64::NEG_INFINITY, f64::INFINITY, "student");
        }
    }

    #[test]
    fn wishart_normalization_example() {
        check_normalized(|x| wishart_logpdf_1d(x, 2.0, 3.0).unwrap(), 0.0, f64::INFINITY, "wishart(2,3)");
    }

    #[test]
    fn dirichlet_two_dim_integrates_against_surface_measure() {
        // Along the segment p = (t, 1-t) the surface element is sqrt(2) dt.
        // t = u^2 near 0 and 1 - t = u^2 near 1 remove the endpoint singularities.
        for &(e1, e2) in &[(1.0, 1.0), (2.5, 0.7), (5.0, 5.0), (0.5, 3.0)] {
            let f = |p: [f64; 2]| dirichlet_logpdf(&p, &[e1, e2]).unwrap().exp() * 2.0_f64.sqrt();
            let c = 0.5_f64.sqrt();
            let v = integrate(|u| 2.0 * u * f([u * u, 1.0 - u * u]), 0.0, c, 1e-13)
                + integrate(|u| 2.0 * u * f([1.0 - u * u, u * u]), 0.0, c, 1e-13);
            assert!((v - 1.0).abs() < 1e-6, "dirichlet({e1},{e2}): {v}");
        }
    }
}
