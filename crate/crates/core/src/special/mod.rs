//! Log-domain densities and special functions.
//!
//! Conventions follow the model hierarchy: Gaussians are parameterized by
//! precision, Gamma and one-dimensional Wishart densities by shape and rate,
//! and the Wishart exponent is `exp(-R S)` with no factor one half.

mod densities;
mod gamma;
mod kummer;
mod progamma;
mod skew_student;

pub use densities::{dirichlet_logpdf, gamma_logpdf, gaussian_logpdf, student_logpdf, wishart_logpdf_1d};
pub use gamma::log_gamma;
pub use kummer::log_kummer_1f1;
pub use progamma::{progamma_unnorm_logpdf, ProGammaParams, ProGammaVariant};
pub use skew_student::{skew_student_logpdf, SkewStudentParams};

pub(crate) use densities::{gamma_logpdf_unchecked, gaussian_logpdf_unchecked};
pub(crate) use gamma::lgamma;

use num_traits::Float;

/// `ln(2 pi)`.
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(sum(exp(xs)))`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}
