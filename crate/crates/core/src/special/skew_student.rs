use num_traits::Float;

use super::{lgamma, log_add_exp, log_kummer_1f1, LN_2PI};
use crate::error::{finite, positive, Result};

/// Parameters of the skew-Student distribution: the law of
/// `mu + (z / sqrt(s) + nu) / sqrt(alpha)` with `z ~ N(0, 1)` and
/// `alpha ~ Gamma(m, r)` independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewStudentParams {
    /// Location (nepers).
    pub mu: f64,
    /// Skew offset (nepers).
    pub nu: f64,
    /// Precision (nepers^-2).
    pub s: f64,
    /// Gamma shape.
    pub m: f64,
    /// Gamma rate.
    pub r: f64,
}

impl SkewStudentParams {
    pub fn new(mu: f64, nu: f64, s: f64, m: f64, r: f64) -> Result<Self> {
        finite("skew-student mu", mu)?;
        finite("skew-student nu", nu)?;
        positive("skew-student precision", s)?;
        positive("skew-student shape", m)?;
        positive("skew-student rate", r)?;
        Ok(Self { mu, nu, s, m, r })
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.mu, self.nu, self.s, self.m, self.r).map(|_| ())
    }

    /// Mean `mu + nu sqrt(r) Gamma(m - 1/2) / Gamma(m)`; needs `m > 1/2`.
    pub fn mean(&self) -> Result<f64> {
        if !(self.m > 0.5) {
            return Err(crate::Error::MomentNonexistence { shape: self.m });
        }
        Ok(self.mu + self.nu * self.r.sqrt() * (lgamma(self.m - 0.5) - lgamma(self.m)).exp())
    }
}

/// Log-density of the skew-Student distribution at `x`.
///
/// With `y = x - mu`, `A = r + s y^2 / 2` and `t = s y nu / sqrt(A)`:
///
/// ```text
/// p(x) = r^m / Gamma(m) sqrt(s / 2pi) A^-(m + 1/2) exp(-s nu^2 / 2) H(m, t)
/// H(m, t) = Gamma(m + 1/2) 1F1(m + 1/2; 1/2; t^2/4) + t Gamma(m + 1) 1F1(m + 1; 3/2; t^2/4)
/// ```
///
/// `H(m, t) = int_0^inf 2 v^(2m) exp(-v^2 + t v) dv`. For `t >= 0` both terms
/// are positive and are combined with log-sum-exp. For `t < 0` they cancel;
/// the closed form is kept while the second term is at most 90% of the
/// first, otherwise `H` is integrated directly (see [`log_h_quadrature`]).
pub fn skew_student_logpdf(x: f64, p: &SkewStudentParams) -> Result<f64> {
    p.validate()?;
    if x.is_nan() {
        return Err(crate::error::domain("skew-student argument", x));
    }
    if x.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    let y = x - p.mu;
    let a = p.r + 0.5 * p.s * y * y;
    let t = p.s * y * p.nu / a.sqrt();
    let head = p.m * p.r.ln() - lgamma(p.m) + 0.5 * (p.s.ln() - LN_2PI) - (p.m + 0.5) * a.ln()
        - 0.5 * p.s * p.nu * p.nu;
    Ok(head + log_h(p.m, t)?)
}

/// `ln H(m, t)` as documented on [`skew_student_logpdf`].
pub(crate) fn log_h(m: f64, t: f64) -> Result<f64> {
    let z = 0.25 * t * t;
    let even = lgamma(m + 0.5) + log_kummer_1f1(m + 0.5, 0.5, z)?;
    if t == 0.0 {
        return Ok(even);
    }
    let odd = lgamma(m + 1.0) + t.abs().ln() + log_kummer_1f1(m + 1.0, 1.5, z)?;
    if t > 0.0 {
        return Ok(log_add_exp(even, odd));
    }
    let d = odd - even;
    if d < 0.9_f64.ln() {
        Ok(even + (-d.exp()).ln_1p())
    } else {
        Ok(log_h_quadrature(m, t))
    }
}

/// `ln int_0^inf 2 v^(2m) exp(-v^2 + t v) dv` by the trapezoidal rule in
/// `s = ln v`. The integrand is log-concave and analytic in `s`, so the
/// equal-step rule converges geometrically; the step is the smaller of 0.1
/// and a fifth of the Laplace width at the mode.
pub(crate) fn log_h_quadrature(m: f64, t: f64) -> f64 {
    let k = 2.0 * m + 1.0;
    let g = |s: f64| {
        let v = s.exp();
        core::f64::consts::LN_2 + k * s - v * v + t * v
    };
    let v_mode = (t + (t * t + 8.0 * k).sqrt()) / 4.0;
    let s_mode = v_mode.ln();
    let curvature = 4.0 * v_mode * v_mode - t * v_mode;
    let h = (0.2 / curvature.sqrt()).min(0.1);
    let g_mode = g(s_mode);
    let mut sum = 1.0;
    for dir in [-1.0, 1.0] {
        let mut i = 1.0;
        loop {
            let rel = g(s_mode + dir * i * h) - g_mode;
            sum += rel.exp();
            if rel < -50.0 {
                break;
            }
            i += 1.0;
        }
    }
    g_mode + (h * sum).ln()
}
