//! Apparent Shannon information from prediction records.
//!
//! A record holds the log density an algorithm assigned to the realized
//! outcome (`log_q`) and the log density of a reference (`log_p`: the prior,
//! or an earlier algorithm). Its `j` value is `log_q - log_p` in nepers.

use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::mcmc::{run_chains, ChainConfig, ChainTrace, Diagnostics};
use crate::model::{Hyperparameters, JDataset};
use crate::stats::quantile_sorted;

/// Quantiles reported besides the 2.5%, 50% and 97.5% points.
pub const DEFAULT_EXTRA_QUANTILES: [f64; 4] = [0.05, 0.25, 0.75, 0.95];

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PredictionRecord {
    pub log_q: f64,
    pub log_p: f64,
    pub id: String,
}

/// `j = log_q - log_p`. A zero predicted density (`log_q = -inf`) gives
/// `j = -inf`, which callers must report rather than drop.
pub fn compute_j(record: &PredictionRecord) -> Result<f64> {
    if !record.log_p.is_finite() {
        return Err(Error::Input(alloc::format!("record {:?}: log_p must be finite, got {}", record.id, record.log_p)));
    }
    if record.log_q.is_nan() || record.log_q == f64::INFINITY {
        return Err(Error::Input(alloc::format!("record {:?}: invalid log_q {}", record.id, record.log_q)));
    }
    Ok(record.log_q - record.log_p)
}

/// Arithmetic mean of the `j` values; `-inf` if any value is `-inf`.
pub fn point_estimate(js: &[f64]) -> Result<f64> {
    if js.is_empty() {
        return Err(Error::Input("no j values".into()));
    }
    if let Some(&v) = js.iter().find(|v| v.is_nan() || **v == f64::INFINITY) {
        return Err(domain("j value", v));
    }
    // Shifting by the first value keeps constant data exact.
    let x0 = js[0];
    if x0 == f64::NEG_INFINITY {
        return Ok(x0);
    }
    Ok(x0 + js.iter().map(|&v| v - x0).sum::<f64>() / js.len() as f64)
}

/// `j` of algorithm 1 measured against algorithm 0.
pub fn relative_j(log_q1: f64, log_q0: f64) -> Result<f64> {
    crate::error::finite("log_q1", log_q1)?;
    crate::error::finite("log_q0", log_q0)?;
    Ok(log_q1 - log_q0)
}

/// The three `j` values linking two algorithms and a reference, and how far
/// `j(2 vs 0)` is from `j(2 vs 1) + j(1 vs 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainAdditivity {
    pub j_21: f64,
    pub j_10: f64,
    pub j_20: f64,
    pub residual: f64,
}

pub fn chain_additivity(log_q2: f64, log_q1: f64, log_p: f64) -> Result<ChainAdditivity> {
    let j_21 = relative_j(log_q2, log_q1)?;
    let j_10 = relative_j(log_q1, log_p)?;
    let j_20 = relative_j(log_q2, log_p)?;
    Ok(ChainAdditivity { j_21, j_10, j_20, residual: j_20 - (j_21 + j_10) })
}

/// Group means for a partition of the data into events `E0` and `E1`, the
/// empirical weight of `E1`, and the gap between the weighted average of the
/// group means and the overall mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventAdditivity {
    pub mean_e0: f64,
    pub mean_e1: f64,
    pub weight_e1: f64,
    pub total: f64,
    pub residual: f64,
}

pub fn event_additivity(js: &[f64], in_e1: &[bool]) -> Result<EventAdditivity> {
    if js.len() != in_e1.len() {
        return Err(Error::Structure(alloc::format!("{} values but {} event flags", js.len(), in_e1.len())));
    }
    let (e1, e0): (Vec<(f64, bool)>, Vec<(f64, bool)>) = js.iter().copied().zip(in_e1.iter().copied()).partition(|p| p.1);
    if e0.is_empty() || e1.is_empty() {
        return Err(Error::Input("both events need at least one value".into()));
    }
    let mean = |v: &[(f64, bool)]| v.iter().map(|p| p.0).sum::<f64>() / v.len() as f64;
    let (mean_e0, mean_e1) = (mean(&e0), mean(&e1));
    let weight_e1 = e1.len() as f64 / js.len() as f64;
    let total = point_estimate(js)?;
    let residual = (1.0 - weight_e1) * mean_e0 + weight_e1 * mean_e1 - total;
    Ok(EventAdditivity { mean_e0, mean_e1, weight_e1, total, residual })
}

/// An outcome `x` with the prediction's and the reference's log densities
/// at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySample {
    pub x: f64,
    pub log_q: f64,
    pub log_p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformReport {
    pub j_x: Vec<f64>,
    pub j_w: Vec<f64>,
    pub max_abs_difference: f64,
}

/// Re-expresses both densities in `w = f(x)` (dividing each by `|f'(x)|`)
/// and compares `j` in the two coordinates record by record. `f` must be
/// strictly monotone over the samples.
pub fn transform_invariance_check<F, D>(samples: &[DensitySample], f: F, derivative: D) -> Result<TransformReport>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut sign = 0.0;
    for s in samples {
        let d = derivative(s.x);
        if !(d.is_finite() && d != 0.0) || (sign != 0.0 && d.signum() != sign) {
            return Err(domain("transform derivative", d));
        }
        sign = d.signum();
    }
    let mut pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.x, f(s.x))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in pts.windows(2) {
        if w[1].0 > w[0].0 && (w[1].1 - w[0].1) * sign <= 0.0 {
            return Err(domain("transform is not monotone near", w[1].0));
        }
    }
    let mut j_x = Vec::with_capacity(samples.len());
    let mut j_w = Vec::with_capacity(samples.len());
    let mut max_abs_difference: f64 = 0.0;
    for s in samples {
        let log_jac = derivative(s.x).abs().ln();
        let jx = s.log_q - s.log_p;
        let jw = (s.log_q - log_jac) - (s.log_p - log_jac);
        max_abs_difference = max_abs_difference.max((jw - jx).abs());
        j_x.push(jx);
        j_w.push(jw);
    }
    Ok(TransformReport { j_x, j_w, max_abs_difference })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Units {
    #[default]
    Nepers,
    Bits,
}

impl Units {
    /// Multiplier from nepers to these units.
    pub fn factor(self) -> f64 {
        match self {
            Units::Nepers => 1.0,
            Units::Bits => core::f64::consts::LOG2_E,
        }
    }
}

/// Posterior of `J` summarized from the retained mixture means.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PosteriorSummary {
    /// Number of finite `j` values the model was fitted to.
    pub n: usize,
    /// `-inf` values excluded from the fit.
    pub n_excluded: usize,
    /// Plain average of the finite values (`None` without data).
    pub point_estimate: Option<f64>,
    pub mean: f64,
    pub median: f64,
    pub q025: f64,
    pub q975: f64,
    /// `(probability, value)` pairs.
    pub extra_quantiles: Vec<(f64, f64)>,
    pub units: Units,
    pub converged: bool,
    pub rhat: f64,
    pub ess: f64,
    pub retained: usize,
    pub diagnostics: Diagnostics,
}

impl PosteriorSummary {
    /// Summary of a finished run. Values are in nepers.
    pub fn from_trace(data: &JDataset, n_excluded: usize, trace: &ChainTrace) -> Result<Self> {
        if trace.retained_means.is_empty() {
            return Err(Error::Input("no retained draws".into()));
        }
        let mut sorted = trace.retained_means.clone();
        sorted.sort_by(f64::total_cmp);
        let q = |p| quantile_sorted(&sorted, p);
        Ok(Self {
            n: data.len(),
            n_excluded,
            point_estimate: if data.is_empty() { None } else { Some(point_estimate(&data.values)?) },
            mean: crate::stats::mean(&sorted),
            median: q(0.5),
            q025: q(0.025),
            q975: q(0.975),
            extra_quantiles: DEFAULT_EXTRA_QUANTILES.iter().map(|&p| (p, q(p))).collect(),
            units: Units::Nepers,
            converged: trace.converged(),
            rhat: trace.rhat(),
            ess: trace.ess(),
            retained: sorted.len(),
            diagnostics: trace.diagnostics,
        })
    }

    /// The same summary expressed in `units`.
    pub fn in_units(&self, units: Units) -> Self {
        let k = units.factor() / self.units.factor();
        Self {
            point_estimate: self.point_estimate.map(|v| v * k),
            mean: self.mean * k,
            median: self.median * k,
            q025: self.q025 * k,
            q975: self.q975 * k,
            extra_quantiles: self.extra_quantiles.iter().map(|&(p, v)| (p, v * k)).collect(),
            units,
            ..self.clone()
        }
    }
}

/// Splits `js` into the finite values the model can fit and the number of
/// `-inf` values. NaN and `+inf` are input errors.
pub fn split_finite(js: &[f64]) -> Result<(Vec<f64>, usize)> {
    let mut finite = Vec::with_capacity(js.len());
    let mut excluded = 0;
    for &j in js {
        if j == f64::NEG_INFINITY {
            excluded += 1;
        } else if j.is_finite() {
            finite.push(j);
        } else {
            return Err(domain("j value", j));
        }
    }
    Ok((finite, excluded))
}

/// Fits the mixture model to `js` and summarizes the posterior of `J`.
pub fn posterior_of_j(js: &JDataset, hyper: &Hyperparameters, config: &ChainConfig) -> Result<PosteriorSummary> {
    let trace = run_chains(js, hyper, config)?;
    PosteriorSummary::from_trace(js, 0, &trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{draw_gaussian, RandomStream};
    use rand::Rng;
    use std::vec;

    fn rec(log_q: f64, log_p: f64) -> PredictionRecord {
        PredictionRecord { log_q, log_p, id: "r".into() }
    }

    #[test]
    fn fair_coin_perfect_prediction_is_ln_two() {
        let j = compute_j(&rec(0.0, 0.5_f64.ln())).unwrap();
        assert!((j - core::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(compute_j(&rec(-1.3, -1.3)).unwrap(), 0.0);
        assert_eq!(compute_j(&rec(f64::NEG_INFINITY, -0.7)).unwrap(), f64::NEG_INFINITY);
        assert!(compute_j(&rec(0.0, f64::NEG_INFINITY)).is_err());
        assert!(compute_j(&rec(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn point_estimates() {
        assert!((point_estimate(&[0.1, 0.3]).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(point_estimate(&[0.4; 7]).unwrap(), 0.4);
        assert!(point_estimate(&[]).is_err());
        assert_eq!(point_estimate(&[0.1, f64::NEG_INFINITY]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn single_outlier_moves_the_average() {
        // 417 values averaging +0.112 plus one at -6.58 average +0.096.
        let mut rs = RandomStream::new(51, 0);
        let mut js: std::vec::Vec<f64> = (0..417).map(|_| draw_gaussian(&mut rs, 0.112, 25.0).unwrap()).collect();
        let shift = 0.112 - point_estimate(&js).unwrap();
        js.iter_mut().for_each(|j| *j += shift);
        let without = point_estimate(&js).unwrap();
        js.push(-6.58);
        let with = point_estimate(&js).unwrap();
        assert!((without - 0.112).abs() < 1e-12);
        assert!((with - 0.096).abs() < 1e-3, "{with}");
    }

    #[test]
    fn relative_and_chain_identities() {
        assert_eq!(relative_j(-1.0, -1.0).unwrap(), 0.0);
        let mut rs = RandomStream::new(52, 0);
        for _ in 0..1000 {
            let (a, b, c): (f64, f64, f64) = (rs.random(), rs.random(), rs.random());
            let r = chain_additivity(-5.0 * a, -5.0 * b, -5.0 * c).unwrap();
            assert!(r.residual.abs() < 1e-12);
        }
    }

    #[test]
    fn event_weighted_means() {
        let js = [0.1, -0.4, 0.3, 1.2, -0.05];
        let r = event_additivity(&js, &[true, false, true, false, false]).unwrap();
        assert!(r.residual.abs() < 1e-15);
        assert!((r.weight_e1 - 0.4).abs() < 1e-15);
        assert!(event_additivity(&js, &[true; 5]).is_err());
        assert!(event_additivity(&js, &[true; 4]).is_err());
    }

    #[test]
    fn transform_invariance() {
        let samples: std::vec::Vec<DensitySample> = (1..50)
            .map(|i| {
                let x = 0.1 * i as f64;
                DensitySample { x, log_q: -0.5 * (x - 2.0).powi(2), log_p: -x }
            })
            .collect();
        for r in [
            transform_invariance_check(&samples, |x| x, |_| 1.0).unwrap(),
            transform_invariance_check(&samples, f64::ln, |x| 1.0 / x).unwrap(),
            transform_invariance_check(&samples, |x| 3.0 * x + 1.0, |_| 3.0).unwrap(),
            transform_invariance_check(&samples, |x| -x * x * x, |x| -3.0 * x * x).unwrap(),
        ] {
            assert!(r.max_abs_difference < 1e-12);
        }
        assert!(transform_invariance_check(&samples, |x| (x - 2.0).powi(2), |x| 2.0 * (x - 2.0)).is_err());
        // Derivative claims monotone but the map is not.
        assert!(transform_invariance_check(&samples, |x| (3.0 * x).sin(), |_| 1.0).is_err());
    }

    #[test]
    fn units_convert_every_field() {
        let s = PosteriorSummary {
            n: 3,
            n_excluded: 0,
            point_estimate: Some(0.5),
            mean: 0.4,
            median: 0.3,
            q025: -1.0,
            q975: 2.0,
            extra_quantiles: vec![(0.05, -0.5)],
            units: Units::Nepers,
            converged: true,
            rhat: 1.0,
            ess: 1000.0,
            retained: 10,
            diagnostics: Diagnostics::default(),
        };
        let b = s.in_units(Units::Bits);
        let k = 1.0 / core::f64::consts::LN_2;
        assert!((b.mean - 0.4 * k).abs() < 1e-15 && (b.q975 - 2.0 * k).abs() < 1e-15);
        assert!((b.point_estimate.unwrap() - 0.5 * k).abs() < 1e-15);
        assert!((b.extra_quantiles[0].1 + 0.5 * k).abs() < 1e-15);
        let back = b.in_units(Units::Nepers);
        assert!((back.mean - 0.4).abs() < 1e-15);
    }

    #[test]
    fn split_finite_counts_impossible_outcomes() {
        let (f, n) = split_finite(&[0.1, f64::NEG_INFINITY, -0.3]).unwrap();
        assert_eq!((f, n), (vec![0.1, -0.3], 1));
        assert!(split_finite(&[f64::NAN]).is_err());
    }
}
