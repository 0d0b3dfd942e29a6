//! Constructive skew-Student sampler against the density.

use asi_core::model::draw_skew_student;
use asi_core::special::{skew_student_logpdf, SkewStudentParams};
use asi_core::RandomStream;
use asi_testkit::{integrate, ks_pvalue};

fn ks_against_density(p: &SkewStudentParams, seed: u64, n: usize) -> f64 {
    let mut rs = RandomStream::new(seed, 0);
    let mut xs: Vec<f64> = (0..n).map(|_| draw_skew_student(&mut rs, p).unwrap()).collect();
    xs.sort_by(f64::total_cmp);
    let dens = |x: f64| skew_student_logpdf(x, p).unwrap().exp();
    // CDF accumulated between consecutive order statistics.
    let mut cdf = integrate(dens, f64::NEG_INFINITY, xs[0], 1e-12);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for i in 0..n {
        if i > 0 {
            cdf += integrate(dens, xs[i - 1], xs[i], 1e-13);
        }
        d = d.max((cdf - i as f64 / nf).abs()).max(((i + 1) as f64 / nf - cdf).abs());
    }
    ks_pvalue(d, n)
}

#[test]
fn sampler_matches_density_positive_skew() {
    let p = SkewStudentParams::new(0.3, 0.7, 4.0, 2.5, 1.5).unwrap();
    let pv = ks_against_density(&p, 500, 100_000);
    assert!(pv > 1e-3, "p = {pv}");
}

#[test]
fn sampler_matches_density_negative_skew_heavy_tail() {
    let p = SkewStudentParams::new(-0.2, -1.2, 9.0, 1.3, 0.3).unwrap();
    let pv = ks_against_density(&p, 501, 100_000);
    assert!(pv > 1e-3, "p = {pv}");
}
