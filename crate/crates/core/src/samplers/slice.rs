use num_traits::Float;

use super::{open_uniform, RandomStream};
use crate::error::{Error, Result};

const MAX_STEPS: usize = 200;

/// One univariate slice-sampling transition from `x0` (stepping out by `w`,
/// then shrinkage) for an unnormalized log-density on `(lo, hi)`. Unlike
/// [`ars_sample`](super::ars_sample) this leaves the target invariant rather
/// than drawing from it exactly, and needs no concavity.
pub fn slice_sample<F: FnMut(f64) -> f64>(
    rs: &mut RandomStream,
    mut log_density: F,
    lo: f64,
    hi: f64,
    x0: f64,
    w: f64,
) -> Result<f64> {
    if !(x0 > lo && x0 < hi) {
        return Err(crate::error::domain("slice start", x0));
    }
    if !(w > 0.0) || w.is_infinite() {
        return Err(crate::error::domain("slice width", w));
    }
    let h0 = log_density(x0);
    if !h0.is_finite() {
        return Err(crate::error::domain("log-density at slice start", h0));
    }
    let level = h0 + open_uniform(rs).ln();
    let mut left = x0 - w * open_uniform(rs);
    let mut right = left + w;
    for _ in 0..MAX_STEPS {
        if left <= lo || !(log_density(left) > level) {
            break;
        }
        left -= w;
    }
    for _ in 0..MAX_STEPS {
        if right >= hi || !(log_density(right) > level) {
            break;
        }
        right += w;
    }
    left = left.max(lo);
    right = right.min(hi);
    for _ in 0..10_000 {
        let x = left + open_uniform(rs) * (right - left);
        if x > lo && x < hi && log_density(x) > level {
            return Ok(x);
        }
        if x < x0 {
            left = x;
        } else {
            right = x;
        }
    }
    Err(Error::ArsInit("slice shrinkage did not terminate"))
}
