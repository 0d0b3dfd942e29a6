use alloc::vec::Vec;
use core::ops::BitOr;
use num_traits::Float;

use super::count::resample_count_in_place;
use super::Diagnostics;
use crate::error::Result;
use crate::model::{Hyperparameters, ModelState};
use crate::samplers::{
    ars_sample, dirichlet_unchecked, gamma_unchecked, slice_sample, standard_normal, ArsTarget, RandomStream,
};
use crate::special::{lgamma, progamma_unnorm_logpdf, ProGammaParams, ProGammaVariant};

/// Which conditional updates a sweep performs. Disabled blocks keep their
/// current values, which is how single updates are tested in isolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdateSet(u16);

impl UpdateSet {
    pub const NONE: Self = Self(0);
    pub const ASSIGNMENTS: Self = Self(1);
    pub const ALPHAS: Self = Self(1 << 1);
    /// `(mu_c, nu_c)` jointly.
    pub const LOCATIONS: Self = Self(1 << 2);
    pub const PRECISIONS: Self = Self(1 << 3);
    pub const SHAPES: Self = Self(1 << 4);
    pub const WEIGHTS: Self = Self(1 << 5);
    pub const MU_MU: Self = Self(1 << 6);
    pub const S_MU: Self = Self(1 << 7);
    pub const R_S_MU: Self = Self(1 << 8);
    pub const M_S: Self = Self(1 << 9);
    pub const R_S: Self = Self(1 << 10);
    /// Birth/death of empty components.
    pub const COUNT: Self = Self(1 << 11);
    pub const ALL: Self = Self((1 << 12) - 1);

    pub fn contains(self, other: Self) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn without(self, other: Self) -> Self {
        Self(self.0 & !other.0)
    }
}

impl BitOr for UpdateSet {
    type Output = Self;
    fn bitor(self, rhs: Self) -> Self {
        Self(self.0 | rhs.0)
    }
}

impl Default for UpdateSet {
    fn default() -> Self {
        Self::ALL
    }
}

/// Sufficient statistics of the data assigned to one component.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComponentStats {
    pub n: usize,
    pub sum_alpha: f64,
    pub sum_sqrt_alpha: f64,
    pub sum_log_alpha: f64,
    pub sum_alpha_x: f64,
    pub sum_sqrt_alpha_x: f64,
}

/// Posterior mean and precision matrix of `(mu_c, nu_c)` given everything
/// else. The likelihood is linear-Gaussian in `(mu, nu)`:
/// `sqrt(alpha) x = sqrt(alpha) mu + nu + N(0, 1/S)`.
pub fn location_conditional(
    stats: &ComponentStats,
    s: f64,
    mu_mu: f64,
    s_mu: f64,
    kappa_nu: f64,
) -> ([f64; 2], [[f64; 2]; 2]) {
    let a = s_mu + s * stats.sum_alpha;
    let b = s * stats.sum_sqrt_alpha;
    let d = s / kappa_nu + s * stats.n as f64;
    let h1 = s_mu * mu_mu + s * stats.sum_alpha_x;
    let h2 = s * stats.sum_sqrt_alpha_x;
    let det = a * d - b * b;
    let mean = [(d * h1 - b * h2) / det, (a * h2 - b * h1) / det];
    (mean, [[a, b], [b, d]])
}

/// Gibbs sampler bound to one dataset, with reusable scratch space.
#[derive(Debug)]
pub struct GibbsSampler<'a> {
    hyper: &'a Hyperparameters,
    data: &'a [f64],
    updates: UpdateSet,
    pub diagnostics: Diagnostics,
    logs: Vec<f64>,
    consts: Vec<f64>,
    stats: Vec<ComponentStats>,
    residual: Vec<f64>,
    eta: Vec<f64>,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(data: &'a [f64], hyper: &'a Hyperparameters) -> Self {
        Self::with_updates(data, hyper, UpdateSet::ALL)
    }

    pub fn with_updates(data: &'a [f64], hyper: &'a Hyperparameters, updates: UpdateSet) -> Self {
        Self {
            hyper,
            data,
            updates,
            diagnostics: Diagnostics::default(),
            logs: Vec::new(),
            consts: Vec::new(),
            stats: Vec::new(),
            residual: Vec::new(),
            eta: Vec::new(),
        }
    }

    /// One systematic scan: assignments, alphas, `(mu, nu)`, precisions,
    /// shapes, weights, the five top-level parameters, then the component
    /// count move.
    pub fn sweep(&mut self, rs: &mut RandomStream, state: &mut ModelState) -> Result<()> {
        debug_assert_eq!(state.assignments.len(), self.data.len());
        let u = self.updates;
        if u.contains(UpdateSet::ASSIGNMENTS) {
            self.update_assignments(rs, state);
        }
        if u.contains(UpdateSet::ALPHAS) {
            self.update_alphas(rs, state);
        }
        self.collect_stats(state);
        if u.contains(UpdateSet::LOCATIONS) {
            self.update_locations(rs, state);
        }
        if u.contains(UpdateSet::PRECISIONS) {
            self.update_precisions(rs, state);
        }
        if u.contains(UpdateSet::SHAPES) {
            self.update_shapes(rs, state);
        }
        if u.contains(UpdateSet::WEIGHTS) {
            self.update_weights(rs, state);
        }
        if u.contains(UpdateSet::MU_MU) {
            self.update_mu_mu(rs, state);
        }
        if u.contains(UpdateSet::S_MU) {
            self.update_s_mu(rs, state);
        }
        if u.contains(UpdateSet::R_S_MU) {
            let t = &mut state.top;
            t.r_s_mu = gamma_unchecked(rs, self.hyper.m_r_s_mu + self.hyper.m_s_mu, self.hyper.r_r_s_mu + t.s_mu);
        }
        if u.contains(UpdateSet::M_S) {
            self.update_m_s(rs, state);
        }
        if u.contains(UpdateSet::R_S) {
            let sum_s: f64 = state.components.iter().map(|c| c.s).sum();
            let c = state.c_count() as f64;
            let t = &mut state.top;
            t.r_s = gamma_unchecked(rs, self.hyper.m_r_s + c * t.m_s, self.hyper.r_r_s + (t.m_s - 1.0) * sum_s);
        }
        if u.contains(UpdateSet::COUNT) {
            resample_count_in_place(rs, state, self.data.len(), self.hyper, &mut self.diagnostics)?;
        }
        self.diagnostics.sweeps += 1;
        if state.c_count() == self.hyper.c_max {
            self.diagnostics.sweeps_at_c_max += 1;
        }
        Ok(())
    }

    fn update_assignments(&mut self, rs: &mut RandomStream, state: &mut ModelState) {
        let c = state.c_count();
        if c == 1 {
            state.assignments.iter_mut().for_each(|k| *k = 0);
            return;
        }
        // ln p_c + m ln r - ln Gamma(m) + ln(S) / 2
        self.consts.clear();
        for (comp, &w) in state.components.iter().zip(&state.weights) {
            self.consts.push(w.ln() + comp.m * comp.r().ln() - lgamma(comp.m) + 0.5 * comp.s.ln());
        }
        self.logs.resize(c, 0.0);
        for ((&x, k), &alpha) in self.data.iter().zip(state.assignments.iter_mut()).zip(&state.alphas) {
            let ln_alpha = alpha.ln();
            let inv_sqrt = 1.0 / alpha.sqrt();
            for (i, comp) in state.components.iter().enumerate() {
                let d = x - comp.mu - comp.nu * inv_sqrt;
                self.logs[i] =
                    self.consts[i] + (comp.m - 0.5) * ln_alpha - comp.r() * alpha - 0.5 * alpha * comp.s * d * d;
            }
            *k = crate::samplers::categorical_from_logs(rs, &mut self.logs);
        }
    }

    fn update_alphas(&mut self, rs: &mut RandomStream, state: &mut ModelState) {
        for ((&x, &k), alpha) in self.data.iter().zip(&state.assignments).zip(state.alphas.iter_mut()) {
            let comp = &state.components[k];
            let y = x - comp.mu;
            let a = comp.r() + 0.5 * comp.s * y * y;
            let b = comp.s * y * comp.nu;
            let u = draw_root_alpha(rs, comp.m, a, b, alpha.sqrt(), &mut self.diagnostics);
            *alpha = u * u;
        }
    }

    fn collect_stats(&mut self, state: &ModelState) {
        self.stats.clear();
        self.stats.resize(state.c_count(), ComponentStats::default());
        for ((&x, &k), &alpha) in self.data.iter().zip(&state.assignments).zip(&state.alphas) {
            let st = &mut self.stats[k];
            let sa = alpha.sqrt();
            st.n += 1;
            st.sum_alpha += alpha;
            st.sum_sqrt_alpha += sa;
            st.sum_log_alpha += alpha.ln();
            st.sum_alpha_x += alpha * x;
            st.sum_sqrt_alpha_x += sa * x;
        }
    }

    fn update_locations(&mut self, rs: &mut RandomStream, state: &mut ModelState) {
        let top = state.top;
        for (comp, st) in state.components.iter_mut().zip(&self.stats) {
            let (mean, prec) = location_conditional(st, comp.s, top.mu_mu, top.s_mu, self.hyper.kappa_nu);
            let [mu, nu] = draw_bivariate(rs, mean, prec);
            comp.mu = mu;
            comp.nu = nu;
        }
    }

    fn update_precisions(&mut self, rs: &mut RandomStream, state: &mut ModelState) {
        let c = state.c_count();
        self.residual.clear();
        self.residual.resize(c, 0.0);
        for ((&x, &k), &alpha) in self.data.iter().zip(&state.assignments).zip(&state.alphas) {
            let comp = &state.components[k];
            let d = x - comp.mu - comp.nu / alpha.sqrt();
            self.residual[k] += alpha * d * d;
        }
        let top = state.top;
        for ((comp, st), &res) in state.components.iter_mut().zip(&self.stats).zip(&self.residual) {
            let shape = top.m_s + 0.5 + 0.5 * st.n as f64;
            let rate = (top.m_s - 1.0) * top.r_s + 0.5 * comp.nu * comp.nu / self.hyper.kappa_nu + 0.5 * res;
            comp.s = gamma_unchecked(rs, shape, rate);
        }
    }

    fn update_shapes(&mut self, rs: &mut RandomStream, state: &mut ModelState) {
        let prior = self.hyper.m_prior();
        for (comp, st) in state.components.iter_mut().zip(&self.stats) {
            let n = st.n as f64;
            let post = ProGammaParams {
                a: prior.a + st.sum_alpha - st.sum_log_alpha - n,
                b: prior.b + n,
                n_dim: 1,
                variant: ProGammaVariant::One,
            };
            comp.m = draw_shape(rs, &post, comp.m, &mut self.diagnostics);
        }
    }

    fn update_weights(&mut self, rs: &mut RandomStream, state: &mut ModelState) {
        let eta = self.hyper.eta(state.c_count());
        self.eta.clear();
        self.eta.extend(self.stats.iter().map(|st| eta + st.n as f64));
        state.weights = dirichlet_unchecked(rs, &self.eta);
    }

    fn update_mu_mu(&mut self, rs: &mut RandomStream, state: &mut ModelState) {
        let h = self.hyper;
        let t = &mut state.top;
        let sum_mu: f64 = state.components.iter().map(|c| c.mu).sum();
        let prec = h.s_mu_mu + state.components.len() as f64 * t.s_mu;
        let mean = (h.s_mu_mu * h.mu_mu_mu + t.s_mu * sum_mu) / prec;
        t.mu_mu = mean + standard_normal(rs) / prec.sqrt();
    }

    fn update_s_mu(&mut self, rs: &mut RandomStream, state: &mut ModelState) {
        let t = &mut state.top;
        let ss: f64 = state.components.iter().map(|c| (c.mu - t.mu_mu) * (c.mu - t.mu_mu)).sum();
        let c = state.components.len() as f64;
        t.s_mu = gamma_unchecked(rs, self.hyper.m_s_mu + 0.5 * c, t.r_s_mu + 0.5 * ss);
    }

    fn update_m_s(&mut self, rs: &mut RandomStream, state: &mut ModelState) {
        let prior = self.hyper.m_s_prior();
        let r_s = state.top.r_s;
        let mut a = prior.a;
        for comp in &state.components {
            let x = r_s * comp.s;
            a += x - x.ln() - 1.0;
        }
        let post = ProGammaParams {
            a,
            b: prior.b + state.components.len() as f64,
            n_dim: 1,
            variant: ProGammaVariant::One,
        };
        state.top.m_s = draw_shape(rs, &post, state.top.m_s, &mut self.diagnostics);
    }
}

/// `(mu, nu)` from a bivariate Gaussian with the given mean and precision.
pub(crate) fn draw_bivariate(rs: &mut RandomStream, mean: [f64; 2], prec: [[f64; 2]; 2]) -> [f64; 2] {
    // Precision = L L'; x = mean + L'^-1 z.
    let l11 = prec[0][0].sqrt();
    let l21 = prec[1][0] / l11;
    let l22 = (prec[1][1] - l21 * l21).sqrt();
    let z1 = standard_normal(rs);
    let z2 = standard_normal(rs);
    let t2 = z2 / l22;
    let t1 = (z1 - l21 * t2) / l11;
    [mean[0] + t1, mean[1] + t2]
}

/// Draw `u = sqrt(alpha)` from `u^(2m) exp(-A u^2 + B u)` on `u > 0`.
pub(crate) fn draw_root_alpha(rs: &mut RandomStream, m: f64, a: f64, b: f64, current: f64, diag: &mut Diagnostics) -> f64 {
    let k = 2.0 * m;
    let g = move |u: f64| k * u.ln() - a * u * u + b * u;
    let mode = (b + (b * b + 8.0 * k * a).sqrt()) / (4.0 * a);
    let sd = 1.0 / (k / (mode * mode) + 2.0 * a).sqrt();
    let left = mode - sd.min(0.5 * mode);
    diag.ars_calls += 1;
    let drawn = ArsTarget::new(g, 0.0, f64::INFINITY, &[left, mode, mode + sd])
        .and_then(|mut t| ars_sample(rs, &mut t));
    match drawn {
        Ok(u) => u,
        Err(_) => {
            diag.ars_fallbacks += 1;
            let start = if current > 0.0 && current.is_finite() { current } else { mode };
            slice_sample(rs, g, 0.0, f64::INFINITY, start, sd).unwrap_or(start)
        }
    }
}

/// Draw a Gamma shape from a type-1 proGamma conditional.
pub(crate) fn draw_shape(rs: &mut RandomStream, p: &ProGammaParams, current: f64, diag: &mut Diagnostics) -> f64 {
    let f = |m: f64| progamma_unnorm_logpdf(m, p);
    let center = if current > 1.0 && current.is_finite() { current } else { 2.0 };
    diag.ars_calls += 1;
    let drawn = ArsTarget::from_center(f, 1.0, f64::INFINITY, center, 0.5 * (center - 1.0).max(0.1))
        .and_then(|mut t| ars_sample(rs, &mut t));
    match drawn {
        Ok(m) => m,
        Err(_) => {
            diag.ars_fallbacks += 1;
            slice_sample(rs, f, 1.0, f64::INFINITY, center, 0.5 * center).unwrap_or(center)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use asi_testkit::{batch_mean_se, ks_test, mean_se, normal_cdf};
    use std::vec::Vec;

    #[test]
    fn location_conditional_matches_direct_solve() {
        // Build the 2x2 normal equations term by term from individual data.
        let xs = [0.3, -1.2, 0.8, 2.0];
        let alphas = [0.5, 1.7, 0.9, 3.0];
        let (s, mu_mu, s_mu, kappa_nu) = (2.5, 0.1, 0.7, 1.3);
        let mut st = ComponentStats::default();
        let mut prec = [[s_mu, 0.0], [0.0, s / kappa_nu]];
        let mut lin = [s_mu * mu_mu, 0.0];
        for (&x, &a) in xs.iter().zip(&alphas) {
            let row = [a.sqrt(), 1.0];
            for i in 0..2 {
                for j in 0..2 {
                    prec[i][j] += s * row[i] * row[j];
                }
                lin[i] += s * row[i] * a.sqrt() * x;
            }
            st.n += 1;
            st.sum_alpha += a;
            st.sum_sqrt_alpha += a.sqrt();
            st.sum_alpha_x += a * x;
            st.sum_sqrt_alpha_x += a.sqrt() * x;
        }
        // Cramer's rule on the oracle system.
        let det = prec[0][0] * prec[1][1] - prec[0][1] * prec[1][0];
        let want = [
            (lin[0] * prec[1][1] - prec[0][1] * lin[1]) / det,
            (prec[0][0] * lin[1] - prec[1][0] * lin[0]) / det,
        ];
        let (mean, p) = location_conditional(&st, s, mu_mu, s_mu, kappa_nu);
        for i in 0..2 {
            assert!((mean[i] - want[i]).abs() < 1e-9);
            for j in 0..2 {
                assert!((p[i][j] - prec[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bivariate_draws_have_requested_covariance() {
        let mut rs = RandomStream::new(31, 0);
        let prec = [[2.0, 0.8], [0.8, 1.5]];
        let det = 2.0 * 1.5 - 0.64;
        let cov = [[1.5 / det, -0.8 / det], [-0.8 / det, 2.0 / det]];
        let draws: Vec<[f64; 2]> = (0..200_000).map(|_| draw_bivariate(&mut rs, [1.0, -2.0], prec)).collect();
        let x0: Vec<f64> = draws.iter().map(|d| d[0]).collect();
        let x1: Vec<f64> = draws.iter().map(|d| d[1]).collect();
        let cross: Vec<f64> = draws.iter().map(|d| (d[0] - 1.0) * (d[1] + 2.0)).collect();
        let (m0, se0) = mean_se(&x0);
        let (m1, se1) = mean_se(&x1);
        let (c01, se01) = mean_se(&cross);
        assert!((m0 - 1.0).abs() < 4.0 * se0 && (m1 + 2.0).abs() < 4.0 * se1);
        assert!((c01 - cov[0][1]).abs() < 4.0 * se01, "{c01} vs {}", cov[0][1]);
        assert!(ks_test(&x0, |x| normal_cdf((x - 1.0) / cov[0][0].sqrt())) > 1e-3);
    }

    #[test]
    fn root_alpha_without_skew_is_gamma() {
        // B = 0: alpha = u^2 ~ Gamma(m + 1/2, A).
        let mut rs = RandomStream::new(32, 0);
        let mut diag = Diagnostics::default();
        let (m, a) = (2.5, 1.7);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| {
                let u = draw_root_alpha(&mut rs, m, a, 0.0, 1.0, &mut diag);
                u * u
            })
            .collect();
        let (mean, se) = mean_se(&xs);
        assert!((mean - (m + 0.5) / a).abs() < 4.0 * se);
        assert_eq!(diag.ars_fallbacks, 0);
    }

    #[test]
    fn root_alpha_matches_quadrature_moments() {
        use asi_testkit::integrate;
        let mut rs = RandomStream::new(33, 0);
        let mut diag = Diagnostics::default();
        for &(m, a, b) in &[(1.2, 0.4, 3.0), (5.0, 8.0, -6.0), (30.0, 31.0, 0.5)] {
            let f = |u: f64| if u > 0.0 { (2.0 * m * u.ln() - a * u * u + b * u).exp() } else { 0.0 };
            let mode = (b + (b * b + 16.0 * m * a).sqrt()) / (4.0 * a);
            let scale = f(mode);
            let z = integrate(|u| f(u) / scale, 0.0, f64::INFINITY, 1e-12);
            let want = integrate(|u| u * f(u) / scale, 0.0, f64::INFINITY, 1e-12) / z;
            let xs: Vec<f64> = (0..50_000).map(|_| draw_root_alpha(&mut rs, m, a, b, 1.0, &mut diag)).collect();
            let (mean, se) = batch_mean_se(&xs, 20);
            assert!((mean - want).abs() < 4.0 * se, "m={m}: {mean} vs {want}");
        }
        assert_eq!(diag.ars_fallbacks, 0);
    }

    #[test]
    fn update_set_algebra() {
        let s = UpdateSet::ALPHAS | UpdateSet::COUNT;
        assert!(s.contains(UpdateSet::ALPHAS) && !s.contains(UpdateSet::SHAPES));
        assert!(UpdateSet::ALL.contains(s));
        assert!(!UpdateSet::ALL.without(UpdateSet::COUNT).contains(UpdateSet::COUNT));
        assert_eq!(UpdateSet::default(), UpdateSet::ALL);
    }
}
