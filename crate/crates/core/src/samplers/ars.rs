//! Derivative-free adaptive rejection sampling for log-concave densities.
//!
//! The upper hull is built from secants: on `[x_i, x_{i+1}]` it is the lower
//! of the extended chords through `(x_{i-1}, x_i)` and `(x_{i+1}, x_{i+2})`,
//! and beyond the outermost abscissae it is the extension of the outermost
//! chord. The lower squeeze is the chord itself. Both bounds only hold for
//! concave log-densities; a violation at any evaluated point is reported as
//! [`Error::Concavity`].

use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;

use super::{open_uniform, RandomStream};
use crate::error::{Error, Result};

const MAX_POINTS: usize = 64;
const MAX_ITERATIONS: usize = 10_000;

/// An unnormalized log-concave target on the open interval `(lo, hi)`
/// together with its current envelope abscissae. The envelope is refined
/// in place on every rejection, so later draws from the same target are
/// cheaper.
pub struct ArsTarget<F> {
    log_density: F,
    lo: f64,
    hi: f64,
    xs: Vec<f64>,
    hs: Vec<f64>,
}

impl<F> core::fmt::Debug for ArsTarget<F> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ArsTarget")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("abscissae", &self.xs)
            .finish()
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    // Line through (x0, h0) with the given slope.
    x0: f64,
    h0: f64,
    slope: f64,
    log_mass: f64,
}

impl Piece {
    #[inline]
    fn value(&self, x: f64) -> f64 {
        self.h0 + self.slope * (x - self.x0)
    }
}

impl<F: FnMut(f64) -> f64> ArsTarget<F> {
    /// Target with caller-chosen abscissae. At least two points are needed;
    /// with exactly two the midpoint is added. If a side of the domain is
    /// unbounded, the outermost chord on that side must point downhill.
    pub fn new(mut log_density: F, lo: f64, hi: f64, abscissae: &[f64]) -> Result<Self> {
        if !(lo < hi) || lo.is_nan() || hi.is_nan() {
            return Err(Error::ArsInit("empty domain"));
        }
        let mut xs: Vec<f64> = abscissae.to_vec();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.len() < 2 {
            return Err(Error::ArsInit("need at least two distinct abscissae"));
        }
        if xs.len() == 2 {
            xs.insert(1, 0.5 * (xs[0] + xs[1]));
        }
        if xs.iter().any(|&x| !(x > lo && x < hi)) {
            return Err(Error::ArsInit("abscissa outside the domain"));
        }
        let hs: Vec<f64> = xs.iter().map(|&x| log_density(x)).collect();
        if hs.iter().any(|h| !h.is_finite()) {
            return Err(Error::ArsInit("log-density not finite at an abscissa"));
        }
        let target = Self { log_density, lo, hi, xs, hs };
        target.check_tails()?;
        Ok(target)
    }

    /// Target whose abscissae are found by doubling outward from `center`
    /// until the log-density decreases on each unbounded side. A bounded side
    /// gets the midpoint between `center` and the bound.
    pub fn from_center(mut log_density: F, lo: f64, hi: f64, center: f64, step: f64) -> Result<Self> {
        if !(center > lo && center < hi) {
            return Err(Error::ArsInit("center outside the domain"));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::ArsInit("step must be positive"));
        }
        let h_center = log_density(center);
        if !h_center.is_finite() {
            return Err(Error::ArsInit("log-density not finite at the center"));
        }
        let mut points = Vec::with_capacity(12);
        points.push(center);
        for dir in [-1.0, 1.0] {
            let bound = if dir < 0.0 { lo } else { hi };
            if bound.is_finite() {
                points.push(0.5 * (center + bound));
                continue;
            }
            let mut prev = h_center;
            let mut delta = step;
            let mut found = false;
            for _ in 0..64 {
                let x = center + dir * delta;
                let h = log_density(x);
                if !h.is_finite() {
                    return Err(Error::ArsInit("log-density not finite while bracketing"));
                }
                points.push(x);
                if h < prev {
                    found = true;
                    break;
                }
                prev = h;
                delta *= 2.0;
            }
            if !found {
                return Err(Error::ArsInit("log-density does not decrease toward an unbounded end"));
            }
        }
        Self::new(log_density, lo, hi, &points)
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.xs
    }

    fn check_tails(&self) -> Result<()> {
        let n = self.xs.len();
        if self.lo == f64::NEG_INFINITY && !(self.chord_slope(0) > 0.0) {
            return Err(Error::ArsInit("envelope is improper toward -inf"));
        }
        if self.hi == f64::INFINITY && !(self.chord_slope(n - 2) < 0.0) {
            return Err(Error::ArsInit("envelope is improper toward +inf"));
        }
        Ok(())
    }

    #[inline]
    fn chord_slope(&self, i: usize) -> f64 {
        (self.hs[i + 1] - self.hs[i]) / (self.xs[i + 1] - self.xs[i])
    }

    fn squeeze(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return f64::NEG_INFINITY;
        }
        let i = match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => return self.hs[i],
            Err(i) => i - 1,
        };
        self.hs[i] + self.chord_slope(i) * (x - self.xs[i])
    }

    fn build_hull(&self, pieces: &mut Vec<Piece>) -> Result<()> {
        pieces.clear();
        let n = self.xs.len();
        let line = |i: usize| (self.xs[i], self.hs[i], self.chord_slope(i));
        let mut push = |a: f64, b: f64, (x0, h0, slope): (f64, f64, f64)| -> Result<()> {
            if b > a {
                let mut p = Piece { a, b, x0, h0, slope, log_mass: 0.0 };
                p.log_mass = log_mass(&p)?;
                pieces.push(p);
            }
            Ok(())
        };
        push(self.lo, self.xs[0], line(0))?;
        for i in 0..n - 1 {
            let (a, b) = (self.xs[i], self.xs[i + 1]);
            let left = (i >= 1).then(|| line(i - 1));
            let right = (i + 2 < n).then(|| line(i + 1));
            match (left, right) {
                (Some(l), Some(r)) => {
                    let denom = l.2 - r.2;
                    let z = if denom > 0.0 {
                        ((r.1 - r.2 * r.0) - (l.1 - l.2 * l.0)) / denom
                    } else {
                        b
                    };
                    let z = z.clamp(a, b);
                    push(a, z, l)?;
                    push(z, b, r)?;
                }
                (Some(l), None) => push(a, b, l)?,
                (None, Some(r)) => push(a, b, r)?,
                (None, None) => unreachable!("at least three abscissae"),
            }
        }
        push(self.xs[n - 1], self.hi, line(n - 2))?;
        Ok(())
    }

    fn insert(&mut self, x: f64, h: f64) {
        if self.xs.len() >= MAX_POINTS {
            return;
        }
        let i = match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(_) => return,
            Err(i) => i,
        };
        self.xs.insert(i, x);
        self.hs.insert(i, h);
    }
}

fn log_mass(p: &Piece) -> Result<f64> {
    let width = p.b - p.a;
    let beta = p.slope;
    if width.is_infinite() {
        if p.a.is_infinite() && beta > 0.0 {
            return Ok(p.value(p.b) - beta.ln());
        }
        if p.b.is_infinite() && beta < 0.0 {
            return Ok(p.value(p.a) - (-beta).ln());
        }
        return Err(Error::ArsInit("unbounded hull piece does not decay"));
    }
    let bw = beta * width;
    if bw.abs() < 1e-12 {
        return Ok(p.value(0.5 * (p.a + p.b)) + width.ln());
    }
    if beta > 0.0 {
        Ok(p.value(p.b) + (-(-bw).exp_m1()).ln() - beta.ln())
    } else {
        Ok(p.value(p.a) + (-bw.exp_m1()).ln() - (-beta).ln())
    }
}

fn sample_piece(p: &Piece, u: f64) -> f64 {
    let width = p.b - p.a;
    let beta = p.slope;
    if width.is_finite() && (beta * width).abs() < 1e-12 {
        return p.a + u * width;
    }
    if beta > 0.0 {
        // Exponential growing toward b.
        let tail = if width.is_infinite() { 0.0 } else { (-beta * width).exp() };
        p.b + (u + (1.0 - u) * tail).ln() / beta
    } else {
        let gamma = -beta;
        let tail = if width.is_infinite() { 0.0 } else { (-gamma * width).exp() };
        p.a - (u + (1.0 - u) * tail).ln() / gamma
    }
}

/// One exact draw from the target. Each rejection (and each acceptance that
/// needed a log-density evaluation) adds the evaluated point to the
/// envelope.
pub fn ars_sample<F: FnMut(f64) -> f64>(rs: &mut RandomStream, target: &mut ArsTarget<F>) -> Result<f64> {
    let mut pieces = Vec::with_capacity(2 * target.xs.len() + 2);
    let mut dirty = true;
    for _ in 0..MAX_ITERATIONS {
        if dirty {
            target.build_hull(&mut pieces)?;
            let max = pieces.iter().map(|p| p.log_mass).fold(f64::NEG_INFINITY, f64::max);
            for p in pieces.iter_mut() {
                p.log_mass = (p.log_mass - max).exp();
            }
            dirty = false;
        }
        let total: f64 = pieces.iter().map(|p| p.log_mass).sum();
        let mut u = rs.random::<f64>() * total;
        let mut chosen = pieces.len() - 1;
        for (i, p) in pieces.iter().enumerate() {
            if u < p.log_mass {
                chosen = i;
                break;
            }
            u -= p.log_mass;
        }
        let piece = pieces[chosen];
        let x = sample_piece(&piece, open_uniform(rs)).clamp(piece.a, piece.b);
        if !(x > target.lo && x < target.hi) {
            continue;
        }
        let upper = piece.value(x);
        let log_u = open_uniform(rs).ln();
        let lower = target.squeeze(x);
        if log_u <= lower - upper {
            return Ok(x);
        }
        let h = (target.log_density)(x);
        if h.is_nan() {
            return Err(Error::Concavity { x });
        }
        let tol = 1e-9 * (1.0 + h.abs().max(upper.abs()));
        if h > upper + tol || h < lower - tol {
            return Err(Error::Concavity { x });
        }
        if h.is_finite() {
            target.insert(x, h);
            dirty = true;
        }
        if log_u <= h - upper {
            return Ok(x);
        }
    }
    Err(Error::ArsInit("no acceptance within the iteration budget"))
}
