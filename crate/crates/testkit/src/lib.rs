//! Numerical oracles shared by the asi test suites.
//!
//! Everything here is deliberately independent of `asi-core`: quadrature,
//! Kolmogorov-Smirnov tests and Monte-Carlo standard errors are written from
//! scratch so they can check the library without sharing code paths with it.

use std::f64::consts::PI;

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]`. Either bound may be
/// infinite; infinite ranges are mapped onto finite ones by `x = t / (1 - t^2)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, tol);
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(&mut f, a, b, tol),
        (false, false) => {
            let mut g = |t: f64| {
                let d = 1.0 - t * t;
                f(t / d) * (1.0 + t * t) / (d * d)
            };
            adaptive(&mut g, -1.0, 1.0, tol)
        }
        (true, false) => {
            // x = a + t / (1 - t), t in [0, 1)
            let mut g = |t: f64| {
                let d = 1.0 - t;
                f(a + t / d) / (d * d)
            };
            adaptive(&mut g, 0.0, 1.0, tol)
        }
        (false, true) => {
            let mut g = |t: f64| {
                let d = 1.0 - t;
                f(b - t / d) / (d * d)
            };
            adaptive(&mut g, 0.0, 1.0, tol)
        }
    }
}

fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> f64 {
    // Guard the open ends of mapped intervals: Kronrod nodes never touch the
    // endpoints, so the integrand is only evaluated strictly inside.
    let mut intervals = vec![(a, b, gk15(f, a, b))];
    for _ in 0..20_000 {
        let total_err: f64 = intervals.iter().map(|iv| iv.2 .1).sum();
        let total: f64 = intervals.iter().map(|iv| iv.2 .0).sum();
        if total_err <= tol.max(1e-15 * total.abs()) {
            break;
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let left = gk15(f, lo, mid);
        let right = gk15(f, mid, hi);
        intervals.push((lo, mid, left));
        intervals.push((mid, hi, right));
    }
    intervals.iter().map(|iv| iv.2 .0).sum()
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: FnMut(f64) -> f64>(samples: &[f64], mut cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        d = d.max(c - i as f64 / n).max((i + 1) as f64 / n - c);
    }
    d
}

/// Asymptotic p-value of the KS statistic `d` for sample size `n`, using the
/// Kolmogorov series with Stephens' small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = 2.0 * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// KS p-value of `samples` against `cdf`.
pub fn ks_test<F: FnMut(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    ks_pvalue(ks_statistic(samples, cdf), samples.len())
}

/// Standard normal CDF via erfc, accurate to ~1e-15.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Complementary error function (W. J. Cody's rational approximations).
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 0.5 {
        return 1.0 - erf_small(x);
    }
    // Continued fraction (Lentz) for erfc on x >= 0.5
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + a / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (f * PI.sqrt())
}

fn erf_small(x: f64) -> f64 {
    // Maclaurin series, converges fast for |x| < 0.5
    let mut sum = x;
    let mut term = x;
    let x2 = x * x;
    for k in 1..60 {
        term *= -x2 / k as f64;
        let add = term / (2 * k + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 {
            break;
        }
    }
    2.0 / PI.sqrt() * sum
}

/// Sample mean and its naive standard error (independent draws).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean and batch-means standard error for an autocorrelated sequence.
pub fn batch_mean_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let (m, se) = mean_se(&means);
    (m, se)
}

/// |a - b| in units of the combined standard error.
pub fn z_score((m1, se1): (f64, f64), (m2, se2): (f64, f64)) -> f64 {
    (m1 - m2).abs() / (se1 * se1 + se2 * se2).sqrt()
}
