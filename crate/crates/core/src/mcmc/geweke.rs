//! Joint-distribution tests of the sampler (Geweke's "getting it right").
//!
//! The forward simulator draws `(theta, data)` from the prior and the data
//! model. The Gibbs-side simulators start the same way and then apply
//! sampler updates, redrawing data from the current parameters where the
//! scheme calls for it. If every update leaves the posterior invariant, both
//! sides have the same joint distribution, so the moments of any test
//! statistic agree.

use alloc::vec::Vec;
use num_traits::Float;

use super::{GibbsSampler, UpdateSet};
use crate::error::Result;
use crate::model::{draw_data, mixture_mean, prior_sample, Hyperparameters, ModelState};
use crate::samplers::RandomStream;

pub const STATISTIC_COUNT: usize = 13;

/// Names of the entries returned by [`statistics`]. `c0` is the component
/// datum 0 is assigned to.
pub const STATISTIC_NAMES: [&str; STATISTIC_COUNT] = [
    "mu_mu",
    "m_s",
    "mixture_mean",
    "ln_alpha_0",
    "mu_c0_standardized",
    "nu_c0_standardized",
    "ln_s_c0",
    "m_c0",
    "p_c0",
    "ln_s_mu",
    "ln_r_s_mu",
    "ln_r_s",
    "c_count",
];

/// Test statistics of a state with at least one datum.
pub fn statistics(state: &ModelState) -> [f64; STATISTIC_COUNT] {
    let k = state.assignments[0];
    let c = &state.components[k];
    let t = &state.top;
    [
        t.mu_mu,
        t.m_s,
        mixture_mean(state).unwrap_or(f64::NAN),
        state.alphas[0].ln(),
        (c.mu - t.mu_mu) * t.s_mu.sqrt(),
        c.nu * c.s.sqrt(),
        c.s.ln(),
        c.m,
        state.weights[k],
        t.s_mu.ln(),
        t.r_s_mu.ln(),
        t.r_s.ln(),
        state.c_count() as f64,
    ]
}

fn forward_state(rs: &mut RandomStream, hyper: &Hyperparameters, n_data: usize) -> Result<(ModelState, Vec<f64>)> {
    let mut state = prior_sample(rs, hyper)?;
    let data = draw_data(rs, &mut state, n_data);
    Ok((state, data))
}

/// Independent draws from the joint distribution.
pub fn forward_samples(
    rs: &mut RandomStream,
    hyper: &Hyperparameters,
    n_data: usize,
    reps: usize,
) -> Result<Vec<[f64; STATISTIC_COUNT]>> {
    (0..reps).map(|_| forward_state(rs, hyper, n_data).map(|(s, _)| statistics(&s))).collect()
}

/// Independent joint draws each followed by `steps` applications of the
/// selected updates with the data held fixed.
pub fn single_update_samples(
    rs: &mut RandomStream,
    hyper: &Hyperparameters,
    n_data: usize,
    reps: usize,
    updates: UpdateSet,
    steps: usize,
) -> Result<Vec<[f64; STATISTIC_COUNT]>> {
    let mut out = Vec::with_capacity(reps);
    for _ in 0..reps {
        let (mut state, data) = forward_state(rs, hyper, n_data)?;
        let mut sampler = GibbsSampler::with_updates(&data, hyper, updates);
        for _ in 0..steps {
            sampler.sweep(rs, &mut state)?;
        }
        out.push(statistics(&state));
    }
    Ok(out)
}

/// One long chain alternating "redraw data given parameters" with a sweep
/// of the selected updates.
pub fn successive_samples(
    rs: &mut RandomStream,
    hyper: &Hyperparameters,
    n_data: usize,
    iterations: usize,
    updates: UpdateSet,
) -> Result<Vec<[f64; STATISTIC_COUNT]>> {
    let (mut state, mut data) = forward_state(rs, hyper, n_data)?;
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        {
            let mut sampler = GibbsSampler::with_updates(&data, hyper, updates);
            sampler.sweep(rs, &mut state)?;
        }
        data = draw_data(rs, &mut state, n_data);
        out.push(statistics(&state));
    }
    Ok(out)
}

/// One moment of one statistic on both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentComparison {
    pub statistic: &'static str,
    /// 1 for the mean, 2 for the raw second moment.
    pub moment: u8,
    pub forward: f64,
    pub gibbs: f64,
    /// Difference over its combined standard error.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GewekeReport {
    pub comparisons: Vec<MomentComparison>,
}

impl GewekeReport {
    pub fn max_abs_z(&self) -> f64 {
        self.comparisons.iter().map(|c| c.z.abs()).fold(0.0, f64::max)
    }

    /// Comparisons for the named statistics only.
    pub fn restricted(&self, names: &[&str]) -> GewekeReport {
        GewekeReport { comparisons: self.comparisons.iter().filter(|c| names.contains(&c.statistic)).copied().collect() }
    }
}

/// Mean and standard error; with `batches = Some(b)` the error comes from
/// `b` batch means (for autocorrelated sequences).
fn mean_se(xs: &[f64], batches: Option<usize>) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let se = match batches {
        None => (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) / n).sqrt(),
        Some(b) => {
            let size = xs.len() / b;
            let bm: Vec<f64> = xs.chunks_exact(size).take(b).map(|c| c.iter().sum::<f64>() / size as f64).collect();
            let m = bm.iter().sum::<f64>() / b as f64;
            (bm.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (b as f64 - 1.0) / b as f64).sqrt()
        }
    };
    (mean, se)
}

/// Compares first and second moments of every statistic. `gibbs_batches`
/// should be set when the Gibbs-side draws come from one chain.
pub fn compare(
    forward: &[[f64; STATISTIC_COUNT]],
    gibbs: &[[f64; STATISTIC_COUNT]],
    gibbs_batches: Option<usize>,
) -> GewekeReport {
    let mut comparisons = Vec::with_capacity(2 * STATISTIC_COUNT);
    for (i, &name) in STATISTIC_NAMES.iter().enumerate() {
        for moment in [1u8, 2] {
            let pick = |rows: &[[f64; STATISTIC_COUNT]]| -> Vec<f64> { rows.iter().map(|r| r[i].powi(moment as i32)).collect() };
            let (fm, fse) = mean_se(&pick(forward), None);
            let (gm, gse) = mean_se(&pick(gibbs), gibbs_batches);
            let se = (fse * fse + gse * gse).sqrt();
            let z = if se > 0.0 { (gm - fm) / se } else if gm == fm { 0.0 } else { f64::INFINITY };
            comparisons.push(MomentComparison { statistic: name, moment, forward: fm, gibbs: gm, z });
        }
    }
    GewekeReport { comparisons }
}
