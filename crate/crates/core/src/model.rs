//! The Dirichlet-mixed skew-Student hierarchy for scalar `j` values.
//!
//! ```text
//! C            ~ kappa_C^(C-1) (1 - kappa_C),  1 <= C <= c_max (renormalized)
//! p            ~ Dirichlet(kappa_eta / C, ...)            (with 1/sqrt(C))
//! R_Smu        ~ Gamma(m_RSmu, R_RRSmu)
//! S_mu         ~ Gamma(m_Smu, R_Smu)
//! mu_mu        ~ N(mu_mumu, S_mumu)
//! m_S          ~ proGamma(a_mS, b_mS, 1, type 1)
//! R_S          ~ Gamma(m_RS, R_RRS)
//! S_c          ~ Gamma(m_S, (m_S - 1) R_S)
//! m_c          ~ proGamma(a_m, b_m, N_m, type 1),   r_c = m_c - 1
//! nu_c         ~ N(0, S_c / kappa_nu)
//! mu_c         ~ N(mu_mu, S_mu)
//! c_k          ~ p
//! alpha_k      ~ Gamma(m_ck, r_ck)
//! x_k          ~ N(mu_ck + nu_ck / sqrt(alpha_k), alpha_k S_ck)
//! ```
//!
//! Gaussians take a precision, Gammas a shape and rate. With `N = 1` the
//! Wishart densities reduce to Gammas.

use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{domain, positive, Error, Result};
use crate::samplers::{
    ars_sample, categorical_from_logs, dirichlet_unchecked, gamma_unchecked, open_uniform, standard_normal,
    ArsTarget, RandomStream,
};
use crate::special::{
    dirichlet_logpdf, gamma_logpdf_unchecked, gaussian_logpdf_unchecked, lgamma, log_sum_exp,
    progamma_unnorm_logpdf, skew_student_logpdf, ProGammaParams, ProGammaVariant, SkewStudentParams,
};

/// Constant hyperparameters. `Default` gives the settings used for `j` data.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Hyperparameters {
    pub kappa_nu: f64,
    pub kappa_eta: f64,
    pub kappa_c: f64,
    pub mu_mu_mu: f64,
    pub s_mu_mu: f64,
    pub m_s_mu: f64,
    pub m_r_s_mu: f64,
    pub r_r_s_mu: f64,
    pub a_m: f64,
    pub b_m: f64,
    pub n_m: u32,
    pub m_r_s: f64,
    pub r_r_s: f64,
    pub a_m_s: f64,
    pub b_m_s: f64,
    pub n_dim: u32,
    /// Largest number of mixture components.
    pub c_max: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            kappa_nu: 1.0,
            kappa_eta: 10.0,
            kappa_c: 0.9,
            mu_mu_mu: 0.0,
            s_mu_mu: 1.0,
            m_s_mu: 1.1,
            m_r_s_mu: 2.0,
            r_r_s_mu: 2.8,
            a_m: 1.0,
            b_m: 3.0,
            n_m: 1,
            m_r_s: 2.0,
            r_r_s: 200.0,
            a_m_s: 1.0,
            b_m_s: 2.0,
            n_dim: 1,
            c_max: 30,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_c > 0.0 && self.kappa_c < 1.0) {
            return Err(domain("kappa_c", self.kappa_c));
        }
        positive("kappa_eta", self.kappa_eta)?;
        positive("kappa_nu", self.kappa_nu)?;
        crate::error::finite("mu_mu_mu", self.mu_mu_mu)?;
        positive("s_mu_mu", self.s_mu_mu)?;
        positive("m_s_mu", self.m_s_mu)?;
        positive("m_r_s_mu", self.m_r_s_mu)?;
        positive("r_r_s_mu", self.r_r_s_mu)?;
        // a > 0 keeps the proGamma priors proper.
        positive("a_m", self.a_m)?;
        positive("b_m", self.b_m)?;
        positive("m_r_s", self.m_r_s)?;
        positive("r_r_s", self.r_r_s)?;
        positive("a_m_s", self.a_m_s)?;
        positive("b_m_s", self.b_m_s)?;
        if self.n_dim != 1 {
            return Err(domain("n_dim (only scalar data are modelled)", self.n_dim as f64));
        }
        if self.n_m != 1 {
            return Err(domain("n_m (alpha is scalar)", self.n_m as f64));
        }
        if self.c_max == 0 {
            return Err(domain("c_max", 0.0));
        }
        Ok(())
    }

    pub fn m_prior(&self) -> ProGammaParams {
        ProGammaParams { a: self.a_m, b: self.b_m, n_dim: self.n_m, variant: ProGammaVariant::One }
    }

    pub fn m_s_prior(&self) -> ProGammaParams {
        ProGammaParams { a: self.a_m_s, b: self.b_m_s, n_dim: self.n_dim, variant: ProGammaVariant::One }
    }

    /// `ln P(C)` under the truncated geometric prior.
    pub fn log_prior_c(&self, c: usize) -> f64 {
        if c == 0 || c > self.c_max {
            return f64::NEG_INFINITY;
        }
        let k = self.kappa_c;
        (c as f64 - 1.0) * k.ln() + (-k).ln_1p() - (-(self.c_max as f64 * k.ln()).exp_m1()).ln()
    }

    /// Dirichlet concentration `kappa_eta / C` shared by every component.
    pub fn eta(&self, c: usize) -> f64 {
        self.kappa_eta / c as f64
    }
}

/// Parameters shared by all components.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TopLevel {
    pub mu_mu: f64,
    pub s_mu: f64,
    pub r_s_mu: f64,
    pub m_s: f64,
    pub r_s: f64,
}

/// One skew-Student component. The Gamma rate is tied to the shape,
/// `r = m - 1`, so it is derived rather than stored.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComponentParams {
    pub mu: f64,
    pub nu: f64,
    pub s: f64,
    pub m: f64,
}

impl ComponentParams {
    pub fn new(mu: f64, nu: f64, s: f64, m: f64) -> Result<Self> {
        let c = Self { mu, nu, s, m };
        c.validate()?;
        Ok(c)
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.m - 1.0
    }

    pub fn validate(&self) -> Result<()> {
        crate::error::finite("component mu", self.mu)?;
        crate::error::finite("component nu", self.nu)?;
        positive("component precision", self.s)?;
        if !(self.m > 1.0) || self.m.is_infinite() {
            return Err(domain("component shape (must exceed 1)", self.m));
        }
        Ok(())
    }

    pub fn skew_student(&self) -> SkewStudentParams {
        SkewStudentParams { mu: self.mu, nu: self.nu, s: self.s, m: self.m, r: self.r() }
    }

    /// Mean of the component's skew-Student distribution.
    pub fn mean(&self) -> f64 {
        self.mu + self.nu * (self.r().sqrt() * (lgamma(self.m - 0.5) - lgamma(self.m)).exp())
    }
}

/// Full state of the hierarchy. `assignments` and `alphas` hold one entry per
/// datum and are empty when there are no data.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelState {
    pub weights: Vec<f64>,
    pub top: TopLevel,
    pub components: Vec<ComponentParams>,
    pub assignments: Vec<usize>,
    pub alphas: Vec<f64>,
}

impl ModelState {
    /// Number of components `C`.
    pub fn c_count(&self) -> usize {
        self.components.len()
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.c_count();
        if c == 0 || self.weights.len() != c {
            return Err(Error::Structure(alloc::format!("{} weights for {} components", self.weights.len(), c)));
        }
        let total: f64 = self.weights.iter().sum();
        if self.weights.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Structure("weights are not on the simplex".into()));
        }
        for comp in &self.components {
            comp.validate()?;
        }
        let t = &self.top;
        crate::error::finite("mu_mu", t.mu_mu)?;
        positive("s_mu", t.s_mu)?;
        positive("r_s_mu", t.r_s_mu)?;
        positive("r_s", t.r_s)?;
        if !(t.m_s > 1.0) || t.m_s.is_infinite() {
            return Err(domain("m_s (must exceed 1)", t.m_s));
        }
        if self.assignments.len() != self.alphas.len() {
            return Err(Error::Structure(alloc::format!(
                "{} assignments but {} alphas",
                self.assignments.len(),
                self.alphas.len()
            )));
        }
        if let Some(&k) = self.assignments.iter().find(|&&k| k >= c) {
            return Err(Error::Structure(alloc::format!("assignment {k} with only {c} components")));
        }
        if let Some(&a) = self.alphas.iter().find(|&&a| !(a > 0.0) || a.is_infinite()) {
            return Err(domain("alpha", a));
        }
        Ok(())
    }

    /// Number of data assigned to each component.
    pub fn counts(&self) -> Vec<usize> {
        let mut n = alloc::vec![0; self.c_count()];
        for &k in &self.assignments {
            n[k] += 1;
        }
        n
    }
}

/// Observed `j` values in nepers.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JDataset {
    pub values: Vec<f64>,
    pub source_label: String,
}

impl JDataset {
    pub fn new(values: Vec<f64>, source_label: impl Into<String>) -> Result<Self> {
        if let Some(&v) = values.iter().find(|v| !v.is_finite()) {
            return Err(domain("j value", v));
        }
        Ok(Self { values, source_label: source_label.into() })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Draw from a type-1 proGamma (support `m > 1`) by adaptive rejection.
pub(crate) fn draw_progamma_one(rs: &mut RandomStream, p: &ProGammaParams, center: f64) -> Result<f64> {
    let center = if center > 1.0 && center.is_finite() { center } else { 2.0 };
    let mut target =
        ArsTarget::from_center(|m| progamma_unnorm_logpdf(m, p), 1.0, f64::INFINITY, center, 0.5 * center)?;
    ars_sample(rs, &mut target)
}

pub(crate) fn draw_component_count(rs: &mut RandomStream, hyper: &Hyperparameters) -> usize {
    let mut logs: Vec<f64> = (1..=hyper.c_max).map(|c| hyper.log_prior_c(c)).collect();
    categorical_from_logs(rs, &mut logs) + 1
}

pub(crate) fn draw_top_level(rs: &mut RandomStream, hyper: &Hyperparameters) -> Result<TopLevel> {
    let r_s_mu = gamma_unchecked(rs, hyper.m_r_s_mu, hyper.r_r_s_mu);
    let s_mu = gamma_unchecked(rs, hyper.m_s_mu, r_s_mu);
    let mu_mu = hyper.mu_mu_mu + standard_normal(rs) / hyper.s_mu_mu.sqrt();
    let m_s = draw_progamma_one(rs, &hyper.m_s_prior(), 2.0)?;
    let r_s = gamma_unchecked(rs, hyper.m_r_s, hyper.r_r_s);
    Ok(TopLevel { mu_mu, s_mu, r_s_mu, m_s, r_s })
}

/// A component drawn from its prior given the top-level parameters.
pub fn draw_component(rs: &mut RandomStream, top: &TopLevel, hyper: &Hyperparameters) -> Result<ComponentParams> {
    let s = gamma_unchecked(rs, top.m_s, (top.m_s - 1.0) * top.r_s);
    let m = draw_progamma_one(rs, &hyper.m_prior(), 2.0)?;
    let nu = standard_normal(rs) * (hyper.kappa_nu / s).sqrt();
    let mu = top.mu_mu + standard_normal(rs) / top.s_mu.sqrt();
    ComponentParams::new(mu, nu, s, m)
}

/// A state drawn from the prior, with no data-level variables.
pub fn prior_sample(rs: &mut RandomStream, hyper: &Hyperparameters) -> Result<ModelState> {
    hyper.validate()?;
    let c = draw_component_count(rs, hyper);
    let weights = dirichlet_unchecked(rs, &alloc::vec![hyper.eta(c); c]);
    let top = draw_top_level(rs, hyper)?;
    let components = (0..c).map(|_| draw_component(rs, &top, hyper)).collect::<Result<Vec<_>>>()?;
    Ok(ModelState { weights, top, components, assignments: Vec::new(), alphas: Vec::new() })
}

/// Draws `n` data from the state, overwriting its assignments and alphas.
pub fn draw_data(rs: &mut RandomStream, state: &mut ModelState, n: usize) -> Vec<f64> {
    state.assignments.clear();
    state.alphas.clear();
    let mut xs = Vec::with_capacity(n);
    let mut logs = alloc::vec![0.0; state.c_count()];
    for _ in 0..n {
        for (l, &w) in logs.iter_mut().zip(&state.weights) {
            *l = w.ln();
        }
        let k = categorical_from_logs(rs, &mut logs);
        let comp = state.components[k];
        let alpha = gamma_unchecked(rs, comp.m, comp.r());
        let x = comp.mu + comp.nu / alpha.sqrt() + standard_normal(rs) / (alpha * comp.s).sqrt();
        state.assignments.push(k);
        state.alphas.push(alpha);
        xs.push(x);
    }
    xs
}

/// `n` independent draws from the state's mixture, leaving the state alone.
pub fn simulate_data(rs: &mut RandomStream, state: &ModelState, n: usize) -> Vec<f64> {
    let mut scratch = state.clone();
    draw_data(rs, &mut scratch, n)
}

/// Starting state for a chain: a prior draw with every datum in the first
/// component and alphas from that component's Gamma.
pub fn initial_state(rs: &mut RandomStream, n_data: usize, hyper: &Hyperparameters) -> Result<ModelState> {
    let mut state = prior_sample(rs, hyper)?;
    let comp = state.components[0];
    state.assignments = alloc::vec![0; n_data];
    state.alphas = (0..n_data).map(|_| gamma_unchecked(rs, comp.m, comp.r())).collect();
    Ok(state)
}

/// Attaches data-level variables to a state that has none (or the wrong
/// number), drawing assignments and alphas from their conditionals given
/// the data. Useful for starting a chain from a known parameter state.
pub fn attach_data(rs: &mut RandomStream, state: &mut ModelState, data: &[f64]) {
    state.assignments.clear();
    state.alphas.clear();
    let c = state.c_count();
    let mut logs = alloc::vec![0.0; c];
    for &x in data {
        // Sample alpha from each component's prior, then the assignment
        // from the joint weight; good enough as an initial point.
        let mut alphas = alloc::vec![0.0; c];
        for (i, comp) in state.components.iter().enumerate() {
            let a = gamma_unchecked(rs, comp.m, comp.r());
            alphas[i] = a;
            logs[i] = state.weights[i].ln()
                + gaussian_logpdf_unchecked(x, comp.mu + comp.nu / a.sqrt(), a * comp.s);
        }
        let k = categorical_from_logs(rs, &mut logs);
        state.assignments.push(k);
        state.alphas.push(alphas[k]);
    }
}

/// Log prior density of every parameter above the data level. The proGamma
/// terms are unnormalized (their constants are unknown and cancel in every
/// ratio the sampler uses).
pub fn log_prior(state: &ModelState, hyper: &Hyperparameters) -> Result<f64> {
    hyper.validate()?;
    state.validate()?;
    let c = state.c_count();
    let t = &state.top;
    let eta = alloc::vec![hyper.eta(c); c];
    let mut v = hyper.log_prior_c(c) + dirichlet_logpdf(&state.weights, &eta)?;
    v += gamma_logpdf_unchecked(t.r_s_mu, hyper.m_r_s_mu, hyper.r_r_s_mu);
    v += gamma_logpdf_unchecked(t.s_mu, hyper.m_s_mu, t.r_s_mu);
    v += gaussian_logpdf_unchecked(t.mu_mu, hyper.mu_mu_mu, hyper.s_mu_mu);
    v += progamma_unnorm_logpdf(t.m_s, &hyper.m_s_prior());
    v += gamma_logpdf_unchecked(t.r_s, hyper.m_r_s, hyper.r_r_s);
    for comp in &state.components {
        v += component_log_prior(comp, t, hyper);
    }
    Ok(v)
}

/// Log prior density of one component's parameters given the top level
/// (unnormalized in `m`).
pub fn component_log_prior(comp: &ComponentParams, top: &TopLevel, hyper: &Hyperparameters) -> f64 {
    gamma_logpdf_unchecked(comp.s, top.m_s, (top.m_s - 1.0) * top.r_s)
        + progamma_unnorm_logpdf(comp.m, &hyper.m_prior())
        + gaussian_logpdf_unchecked(comp.nu, 0.0, comp.s / hyper.kappa_nu)
        + gaussian_logpdf_unchecked(comp.mu, top.mu_mu, top.s_mu)
}

/// Complete-data log-likelihood: for every datum, the assignment, alpha and
/// Gaussian terms.
pub fn log_likelihood(state: &ModelState, data: &JDataset) -> Result<f64> {
    state.validate()?;
    if state.assignments.len() != data.len() {
        return Err(Error::Structure(alloc::format!(
            "state has {} data-level entries for {} data",
            state.assignments.len(),
            data.len()
        )));
    }
    let mut v = 0.0;
    for ((&x, &k), &alpha) in data.values.iter().zip(&state.assignments).zip(&state.alphas) {
        let comp = &state.components[k];
        v += state.weights[k].ln()
            + gamma_logpdf_unchecked(alpha, comp.m, comp.r())
            + gaussian_logpdf_unchecked(x, comp.mu + comp.nu / alpha.sqrt(), alpha * comp.s);
    }
    Ok(v)
}

/// Joint log-density of state and data.
pub fn log_joint(state: &ModelState, data: &JDataset, hyper: &Hyperparameters) -> Result<f64> {
    Ok(log_prior(state, hyper)? + log_likelihood(state, data)?)
}

/// Exact mean of the state's skew-Student mixture.
pub fn mixture_mean(state: &ModelState) -> Result<f64> {
    let mut v = 0.0;
    for (comp, &w) in state.components.iter().zip(&state.weights) {
        if !(comp.m > 0.5) {
            return Err(Error::MomentNonexistence { shape: comp.m });
        }
        v += w * comp.mean();
    }
    Ok(v)
}

/// Log predictive density of one datum given the state.
pub fn mixture_logpdf(state: &ModelState, x: f64) -> Result<f64> {
    state.validate()?;
    let mut terms = Vec::with_capacity(state.c_count());
    for (comp, &w) in state.components.iter().zip(&state.weights) {
        terms.push(w.ln() + skew_student_logpdf(x, &comp.skew_student())?);
    }
    Ok(log_sum_exp(&terms))
}

/// Constructive skew-Student draw: `mu + (z / sqrt(s) + nu) / sqrt(alpha)`.
pub fn draw_skew_student(rs: &mut RandomStream, p: &SkewStudentParams) -> Result<f64> {
    SkewStudentParams::new(p.mu, p.nu, p.s, p.m, p.r)?;
    let alpha = gamma_unchecked(rs, p.m, p.r);
    Ok(p.mu + (standard_normal(rs) / p.s.sqrt() + p.nu) / alpha.sqrt())
}

/// Uniform integer in `0..n`.
pub(crate) fn uniform_index(rs: &mut RandomStream, n: usize) -> usize {
    ((open_uniform(rs) * n as f64) as usize).min(n - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gaussian_logpdf;
    use asi_testkit::{integrate, mean_se};
    use std::vec;

    fn two_component_state() -> ModelState {
        ModelState {
            weights: vec![0.3, 0.7],
            top: TopLevel { mu_mu: 0.0, s_mu: 1.0, r_s_mu: 1.0, m_s: 2.0, r_s: 0.01 },
            components: vec![
                ComponentParams::new(-0.5, 0.8, 3.0, 2.5).unwrap(),
                ComponentParams::new(0.4, -0.3, 10.0, 4.0).unwrap(),
            ],
            assignments: vec![],
            alphas: vec![],
        }
    }

    #[test]
    fn defaults_match_reference_settings() {
        let h = Hyperparameters::default();
        assert_eq!(
            (h.kappa_nu, h.kappa_eta, h.kappa_c, h.mu_mu_mu, h.s_mu_mu, h.m_s_mu, h.m_r_s_mu, h.r_r_s_mu),
            (1.0, 10.0, 0.9, 0.0, 1.0, 1.1, 2.0, 2.8)
        );
        assert_eq!((h.a_m, h.b_m, h.n_m, h.m_r_s, h.r_r_s, h.a_m_s, h.b_m_s, h.n_dim), (1.0, 3.0, 1, 2.0, 200.0, 1.0, 2.0, 1));
        h.validate().unwrap();
        assert_eq!(h.eta(2), 5.0);
    }

    #[test]
    fn validation_rejects_bad_hyperparameters() {
        let bad = [
            Hyperparameters { kappa_c: 1.0, ..Default::default() },
            Hyperparameters { kappa_eta: 0.0, ..Default::default() },
            Hyperparameters { a_m: 0.0, ..Default::default() },
            Hyperparameters { n_dim: 2, ..Default::default() },
            Hyperparameters { c_max: 0, ..Default::default() },
        ];
        for h in &bad {
            assert!(h.validate().is_err(), "{h:?}");
        }
    }

    #[test]
    fn truncated_geometric_is_normalized() {
        let h = Hyperparameters::default();
        let total: f64 = (1..=h.c_max).map(|c| h.log_prior_c(c).exp()).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let z = 1.0 - 0.9_f64.powi(30);
        assert!((h.log_prior_c(1).exp() - 0.1 / z).abs() < 1e-15);
        assert_eq!(h.log_prior_c(0), f64::NEG_INFINITY);
        assert_eq!(h.log_prior_c(31), f64::NEG_INFINITY);
    }

    #[test]
    fn prior_component_count_frequency() {
        let h = Hyperparameters::default();
        let mut rs = RandomStream::new(21, 0);
        let n = 100_000;
        let ones = (0..n).filter(|_| draw_component_count(&mut rs, &h) == 1).count();
        let p = h.log_prior_c(1).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((ones as f64 / n as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn prior_states_are_valid_with_finite_joint() {
        let h = Hyperparameters::default();
        let mut rs = RandomStream::new(22, 0);
        for _ in 0..2000 {
            let s = prior_sample(&mut rs, &h).unwrap();
            s.validate().unwrap();
            assert!(s.assignments.is_empty() && s.alphas.is_empty());
            let lj = log_joint(&s, &JDataset::empty(), &h).unwrap();
            assert!(lj.is_finite());
            assert_eq!(lj, log_prior(&s, &h).unwrap());
            assert!(mixture_mean(&s).unwrap().is_finite());
        }
    }

    #[test]
    fn single_datum_likelihood_reduces_to_gaussian() {
        let mut s = two_component_state();
        s.weights = vec![1.0];
        s.components = vec![ComponentParams::new(0.2, 0.0, 4.0, 3.0).unwrap()];
        s.assignments = vec![0];
        s.alphas = vec![1.0];
        let data = JDataset::new(vec![0.7], "one").unwrap();
        let ll = log_likelihood(&s, &data).unwrap();
        let want = gaussian_logpdf(0.7, 0.2, 4.0).unwrap() + gamma_logpdf_unchecked(1.0, 3.0, 2.0);
        assert!((ll - want).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let mut s = two_component_state();
        s.assignments = vec![0];
        s.alphas = vec![1.0];
        let data = JDataset::new(vec![0.1, 0.2], "two").unwrap();
        assert!(matches!(log_likelihood(&s, &data), Err(Error::Structure(_))));
        s.assignments = vec![5, 0];
        s.alphas = vec![1.0, 1.0];
        assert!(matches!(s.validate(), Err(Error::Structure(_))));
    }

    /// Naive term-by-term joint with every density written out.
    fn naive_log_joint(s: &ModelState, xs: &[f64], h: &Hyperparameters) -> f64 {
        use core::f64::consts::PI;
        let lg = |x: f64| libm::lgamma(x);
        let gamma = |x: f64, m: f64, r: f64| m * r.ln() - lg(m) + (m - 1.0) * x.ln() - r * x;
        let gauss = |x: f64, mu: f64, s: f64| 0.5 * (s / (2.0 * PI)).ln() - 0.5 * s * (x - mu) * (x - mu);
        let pg1 = |m: f64, a: f64, b: f64| -(a + b) * m + b * m * (m - 1.0).ln() - b * lg(m);
        let c = s.components.len() as f64;
        let eta = h.kappa_eta / c;
        let z: f64 = (1..=h.c_max).map(|k| h.kappa_c.powi(k as i32 - 1) * (1.0 - h.kappa_c)).sum();
        let mut v = ((c - 1.0) * h.kappa_c.ln() + (1.0 - h.kappa_c).ln()) - z.ln();
        v += -0.5 * c.ln() + lg(h.kappa_eta) - c * lg(eta);
        for &w in &s.weights {
            v += (eta - 1.0) * w.ln();
        }
        let t = &s.top;
        v += gamma(t.r_s_mu, h.m_r_s_mu, h.r_r_s_mu) + gamma(t.s_mu, h.m_s_mu, t.r_s_mu);
        v += gauss(t.mu_mu, h.mu_mu_mu, h.s_mu_mu) + pg1(t.m_s, h.a_m_s, h.b_m_s);
        v += gamma(t.r_s, h.m_r_s, h.r_r_s);
        for comp in &s.components {
            v += gamma(comp.s, t.m_s, (t.m_s - 1.0) * t.r_s) + pg1(comp.m, h.a_m, h.b_m);
            v += gauss(comp.nu, 0.0, comp.s / h.kappa_nu) + gauss(comp.mu, t.mu_mu, t.s_mu);
        }
        for (i, &x) in xs.iter().enumerate() {
            let comp = &s.components[s.assignments[i]];
            let a = s.alphas[i];
            v += s.weights[s.assignments[i]].ln() + gamma(a, comp.m, comp.m - 1.0);
            v += gauss(x, comp.mu + comp.nu / a.sqrt(), a * comp.s);
        }
        v
    }

    #[test]
    fn joint_matches_naive_summation() {
        let h = Hyperparameters::default();
        let mut rs = RandomStream::new(23, 0);
        for n in [0, 1, 5, 40] {
            for _ in 0..50 {
                let mut s = prior_sample(&mut rs, &h).unwrap();
                let xs = draw_data(&mut rs, &mut s, n);
                let data = JDataset::new(xs.clone(), "synthetic").unwrap();
                let got = log_joint(&s, &data, &h).unwrap();
                let want = naive_log_joint(&s, &xs, &h);
                assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{got} vs {want}");
            }
        }
    }

    #[test]
    fn mixture_mean_single_component() {
        let mut s = two_component_state();
        s.weights = vec![1.0];
        s.components = vec![ComponentParams::new(0.0, 1.0, 1.0, 3.0).unwrap()];
        // sqrt(2) Gamma(5/2) / Gamma(3), evaluated with mpmath.
        let want = 0.939_985_602_986_625_19;
        assert!((mixture_mean(&s).unwrap() - want).abs() < 1e-14);

        let mut rs = RandomStream::new(24, 0);
        let p = s.components[0].skew_student();
        let xs: std::vec::Vec<f64> = (0..1_000_000).map(|_| draw_skew_student(&mut rs, &p).unwrap()).collect();
        let (mean, se) = mean_se(&xs);
        assert!((mean - want).abs() < 4.0 * se, "{mean} {se}");

        s.components[0].nu = 0.0;
        s.components[0].mu = 0.37;
        assert_eq!(mixture_mean(&s).unwrap(), 0.37);
    }

    #[test]
    fn mixture_mean_is_linear_in_weights() {
        let s = two_component_state();
        let want = 0.3 * s.components[0].mean() + 0.7 * s.components[1].mean();
        assert!((mixture_mean(&s).unwrap() - want).abs() < 1e-15);
        let mut bad = s.clone();
        bad.components[0].m = 0.4;
        assert!(matches!(mixture_mean(&bad), Err(Error::MomentNonexistence { .. })));
    }

    #[test]
    fn mixture_logpdf_single_component_and_normalization() {
        let s = two_component_state();
        let mut single = s.clone();
        single.weights = vec![1.0];
        single.components.truncate(1);
        let p = single.components[0].skew_student();
        for x in [-2.0, 0.0, 1.5] {
            assert_eq!(mixture_logpdf(&single, x).unwrap(), skew_student_logpdf(x, &p).unwrap());
        }
        let total = integrate(|x| mixture_logpdf(&s, x).unwrap().exp(), f64::NEG_INFINITY, f64::INFINITY, 1e-11);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn mixture_mean_equals_first_moment() {
        let s = two_component_state();
        let m1 = integrate(|x| x * mixture_logpdf(&s, x).unwrap().exp(), f64::NEG_INFINITY, f64::INFINITY, 1e-11);
        assert!((m1 - mixture_mean(&s).unwrap()).abs() < 1e-5, "{m1}");
    }

    #[test]
    fn tiny_weights_do_not_overflow() {
        let mut s = two_component_state();
        s.weights = vec![1e-300, 1.0 - 1e-300];
        let v = mixture_logpdf(&s, 0.3).unwrap();
        let want = skew_student_logpdf(0.3, &s.components[1].skew_student()).unwrap();
        assert!((v - want).abs() < 1e-12);
    }

    #[test]
    fn rate_tracks_shape() {
        let mut c = ComponentParams::new(0.0, 0.0, 1.0, 2.5).unwrap();
        assert_eq!(c.r(), 1.5);
        c.m = 7.0;
        assert_eq!(c.r(), 6.0);
        assert!(ComponentParams::new(0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn prior_mixture_mean_spans_about_two_nepers() {
        let h = Hyperparameters::default();
        let mut rs = RandomStream::new(25, 0);
        let mut means: std::vec::Vec<f64> = (0..10_000).map(|_| mixture_mean(&prior_sample(&mut rs, &h).unwrap()).unwrap()).collect();
        means.sort_by(f64::total_cmp);
        let lo = crate::stats::quantile_sorted(&means, 0.025);
        let hi = crate::stats::quantile_sorted(&means, 0.975);
        assert!((-3.5..=-1.0).contains(&lo) && (1.0..=3.5).contains(&hi), "{lo} {hi}");
    }
}
