use crate::error::{domain, Result};

/// `ln Gamma(x)` for `x > 0`.
///
/// Backed by the `libm` port of the musl/FreeBSD `lgamma`, which keeps full
/// relative accuracy near the zeros at 1 and 2.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(domain("log_gamma argument", x));
    }
    Ok(lgamma(x))
}

#[inline]
pub(crate) fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}
