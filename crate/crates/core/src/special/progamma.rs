use num_traits::Float;

use super::lgamma;
use crate::error::{domain, finite, positive, Result};

/// The three proGamma parameterizations, named by the Gamma (or Wishart)
/// family they are conjugate to as the shape `n` varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ProGammaVariant {
    /// Shape `m`, fixed rate `r`. Support `m > 0`.
    Zero,
    /// Shape `n`, rate `(n - 1) t`: the mean of the inverse is fixed. Support `m > 1`.
    One,
    /// Shape `n`, rate `(n + (N-1)/2) t`: the mean is fixed. Support `m > 0`.
    Two,
}

impl ProGammaVariant {
    pub fn from_index(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Self::Zero),
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            _ => Err(domain("proGamma variant", v as f64)),
        }
    }

    /// Lower end of the support.
    pub fn support_start(self) -> f64 {
        match self {
            Self::One => 1.0,
            _ => 0.0,
        }
    }
}

/// Parameters of the (unnormalized) proGamma density on a Gamma/Wishart
/// shape parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProGammaParams {
    pub a: f64,
    pub b: f64,
    pub n_dim: u32,
    pub variant: ProGammaVariant,
}

impl ProGammaParams {
    pub fn new(a: f64, b: f64, n_dim: u32, variant: ProGammaVariant) -> Result<Self> {
        finite("proGamma a", a)?;
        positive("proGamma b", b)?;
        if n_dim == 0 {
            return Err(domain("proGamma dimension", 0.0));
        }
        Ok(Self { a, b, n_dim, variant })
    }

    /// Posterior parameters after observing one Gamma/Wishart draw `S` whose
    /// base matrix is `T` (`R = T` for variant 0, `(m-1) T` for variant 1,
    /// `(m + (N-1)/2) T` for variant 2), given `ln det(T S)` and `tr(T S)`.
    ///
    /// `b' = b + 1`; `a' = a - N - ln det(TS)` for variant 0 and
    /// `a' = a - N - ln det(TS) + tr(TS)` for variants 1 and 2.
    pub fn observe(&self, log_det_ts: f64, trace_ts: f64) -> Result<Self> {
        let n = self.n_dim as f64;
        let a = match self.variant {
            ProGammaVariant::Zero => self.a - n - log_det_ts,
            ProGammaVariant::One | ProGammaVariant::Two => self.a - n - log_det_ts + trace_ts,
        };
        Self::new(a, self.b + 1.0, self.n_dim, self.variant)
    }

    /// [`observe`](Self::observe) for a scalar Gamma draw `x` with base rate `t`.
    pub fn observe_gamma(&self, x: f64, t: f64) -> Result<Self> {
        positive("proGamma observation", x)?;
        positive("proGamma base rate", t)?;
        if self.n_dim != 1 {
            return Err(domain("proGamma dimension for a Gamma observation", self.n_dim as f64));
        }
        self.observe((t * x).ln(), t * x)
    }
}

/// Unnormalized proGamma log-density at `m`; `-inf` outside the support.
///
/// ```text
/// v = 0: -(a + N b) m - b sum_j ln Gamma(m + j/2)
/// v = 1: ... + N b (m + (N-1)/2) ln(m - 1)      (m > 1)
/// v = 2: ... + N b (m + (N-1)/2) ln(m + (N-1)/2)
/// ```
///
/// The normalizing constants are unknown, so nothing in the crate relies on
/// them: samplers and acceptance ratios only use differences in `m`.
pub fn progamma_unnorm_logpdf(m: f64, p: &ProGammaParams) -> f64 {
    if !(m > p.variant.support_start()) || m.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let n = p.n_dim as f64;
    let half = 0.5 * (n - 1.0);
    let mut gammas = 0.0;
    for j in 0..p.n_dim {
        gammas += lgamma(m + 0.5 * j as f64);
    }
    let base = -(p.a + n * p.b) * m - p.b * gammas;
    match p.variant {
        ProGammaVariant::Zero => base,
        ProGammaVariant::One => base + n * p.b * (m + half) * (m - 1.0).ln(),
        ProGammaVariant::Two => base + n * p.b * (m + half) * (m + half).ln(),
    }
}
