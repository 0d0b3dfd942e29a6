//! Gibbs sampling over the mixture hierarchy, birth/death moves on the
//! component count, chain orchestration and convergence checks.

mod count;
mod gibbs;
pub mod geweke;

pub use count::{birth_log_ratio, resample_component_count};
pub use gibbs::{location_conditional, ComponentStats, GibbsSampler, UpdateSet};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{attach_data, initial_state, mixture_mean, Hyperparameters, JDataset, ModelState};
use crate::samplers::RandomStream;
use crate::stats::{effective_sample_size, quantile_sorted, split_rhat};

/// R-hat above this marks a run as unconverged.
pub const RHAT_THRESHOLD: f64 = 1.05;
/// Effective sample size below this marks a run as unconverged.
pub const ESS_THRESHOLD: f64 = 400.0;

/// Counters accumulated over a chain.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub sweeps: u64,
    pub ars_calls: u64,
    /// Adaptive rejection failures that fell back to slice sampling.
    pub ars_fallbacks: u64,
    pub birth_proposals: u64,
    pub birth_accepts: u64,
    pub death_proposals: u64,
    pub death_accepts: u64,
    /// Sweeps that ended with `C = c_max`.
    pub sweeps_at_c_max: u64,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Self) {
        self.sweeps += other.sweeps;
        self.ars_calls += other.ars_calls;
        self.ars_fallbacks += other.ars_fallbacks;
        self.birth_proposals += other.birth_proposals;
        self.birth_accepts += other.birth_accepts;
        self.death_proposals += other.death_proposals;
        self.death_accepts += other.death_accepts;
        self.sweeps_at_c_max += other.sweeps_at_c_max;
    }

    pub fn birth_acceptance_rate(&self) -> f64 {
        ratio(self.birth_accepts, self.birth_proposals)
    }

    pub fn death_acceptance_rate(&self) -> f64 {
        ratio(self.death_accepts, self.death_proposals)
    }

    pub fn c_at_truncation_fraction(&self) -> f64 {
        ratio(self.sweeps_at_c_max, self.sweeps)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// How chains are started.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum InitMode {
    /// A prior draw with every datum in one component.
    #[default]
    Prior,
    /// A caller-supplied state.
    Provided,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ChainConfig {
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub chains: usize,
    pub seed: u64,
    pub init_mode: InitMode,
    /// Keep per-datum assignments and alphas in retained states.
    pub keep_latents: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            sweeps: 20_000,
            burn_in: 5_000,
            thin: 10,
            chains: 4,
            seed: 0,
            init_mode: InitMode::Prior,
            keep_latents: false,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 || self.thin == 0 || self.chains == 0 {
            return Err(Error::Input("sweeps, thin and chains must be positive".into()));
        }
        if self.burn_in >= self.sweeps {
            return Err(Error::Input(alloc::format!(
                "burn_in ({}) must be less than sweeps ({})",
                self.burn_in,
                self.sweeps
            )));
        }
        Ok(())
    }

    /// Retained draws per chain.
    pub fn retained_per_chain(&self) -> usize {
        (self.sweeps - self.burn_in) / self.thin
    }
}

/// Retained output of one or more chains. `retained_means[i]` is the mixture
/// mean of `retained_states[i]`; chains are concatenated in index order.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainTrace {
    pub retained_states: Vec<ModelState>,
    pub retained_means: Vec<f64>,
    /// Retained means split by chain, for between-chain diagnostics.
    pub chain_means: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

impl ChainTrace {
    pub fn rhat(&self) -> f64 {
        split_rhat(&self.chain_means)
    }

    pub fn ess(&self) -> f64 {
        effective_sample_size(&self.chain_means)
    }

    /// False when R-hat exceeds [`RHAT_THRESHOLD`], the ESS is below
    /// [`ESS_THRESHOLD`], or there are too few draws to tell.
    pub fn converged(&self) -> bool {
        let (r, e) = (self.rhat(), self.ess());
        r.is_finite() && r <= RHAT_THRESHOLD && e >= ESS_THRESHOLD
    }

    /// Appends another trace's chains after this one's.
    pub fn merge(&mut self, other: ChainTrace) {
        self.retained_states.extend(other.retained_states);
        self.retained_means.extend(other.retained_means);
        self.chain_means.extend(other.chain_means);
        self.diagnostics.merge(&other.diagnostics);
    }

    /// Number of retained states per component count `C` (index `C - 1`).
    pub fn component_count_histogram(&self, c_max: usize) -> Vec<usize> {
        let mut h = alloc::vec![0; c_max];
        for s in &self.retained_states {
            h[s.c_count() - 1] += 1;
        }
        h
    }
}

/// One sweep with every update enabled, returning the new state.
pub fn gibbs_sweep(rs: &mut RandomStream, state: &ModelState, data: &JDataset, hyper: &Hyperparameters) -> Result<ModelState> {
    check_state(state, data)?;
    let mut next = state.clone();
    GibbsSampler::new(&data.values, hyper).sweep(rs, &mut next)?;
    Ok(next)
}

fn check_state(state: &ModelState, data: &JDataset) -> Result<()> {
    state.validate()?;
    if state.assignments.len() != data.len() {
        return Err(Error::Structure(alloc::format!(
            "state has {} data-level entries for {} data",
            state.assignments.len(),
            data.len()
        )));
    }
    Ok(())
}

/// Runs chain `index` (random stream `index` of `config.seed`). With
/// `init = Some(state)` the chain starts there, drawing data-level variables
/// if the state has none; otherwise it starts from [`initial_state`].
pub fn run_chain(
    data: &JDataset,
    hyper: &Hyperparameters,
    config: &ChainConfig,
    index: usize,
    init: Option<&ModelState>,
) -> Result<ChainTrace> {
    hyper.validate()?;
    config.validate()?;
    let mut rs = RandomStream::new(config.seed, index as u64);
    let mut state = match init {
        Some(s) => {
            let mut s = s.clone();
            if s.assignments.len() != data.len() {
                attach_data(&mut rs, &mut s, &data.values);
            }
            check_state(&s, data)?;
            s
        }
        None => initial_state(&mut rs, data.len(), hyper)?,
    };
    let mut sampler = GibbsSampler::new(&data.values, hyper);
    let keep = config.retained_per_chain();
    let mut trace = ChainTrace {
        retained_states: Vec::with_capacity(keep),
        retained_means: Vec::with_capacity(keep),
        chain_means: Vec::new(),
        diagnostics: Diagnostics::default(),
    };
    for sweep in 1..=config.sweeps {
        sampler.sweep(&mut rs, &mut state)?;
        if sweep > config.burn_in && (sweep - config.burn_in) % config.thin == 0 {
            trace.retained_means.push(mixture_mean(&state)?);
            let mut kept = state.clone();
            if !config.keep_latents {
                kept.assignments = Vec::new();
                kept.alphas = Vec::new();
            }
            trace.retained_states.push(kept);
        }
    }
    trace.chain_means.push(trace.retained_means.clone());
    trace.diagnostics = sampler.diagnostics;
    Ok(trace)
}

/// Runs `config.chains` chains one after another and merges them. The result
/// depends only on the inputs and the seed; running the same chains on
/// separate threads with [`run_chain`] and merging in index order gives the
/// same trace.
pub fn run_chains(data: &JDataset, hyper: &Hyperparameters, config: &ChainConfig) -> Result<ChainTrace> {
    if config.init_mode == InitMode::Provided {
        return Err(Error::Input("init_mode = provided needs a starting state".into()));
    }
    run_chains_from(data, hyper, config, None)
}

/// [`run_chains`] with every chain started from `init` when given.
pub fn run_chains_from(
    data: &JDataset,
    hyper: &Hyperparameters,
    config: &ChainConfig,
    init: Option<&ModelState>,
) -> Result<ChainTrace> {
    config.validate()?;
    let mut merged = ChainTrace::default();
    for i in 0..config.chains {
        merged.merge(run_chain(data, hyper, config, i, init)?);
    }
    Ok(merged)
}

/// Outcome of running the same data from two starting points.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceReport {
    pub mean_difference: f64,
    pub q025_difference: f64,
    pub q975_difference: f64,
    pub rhat: [f64; 2],
    pub ess: [f64; 2],
    pub pass: bool,
}

/// Largest absolute difference in posterior mean of `J` between the two runs.
pub const MEAN_TOLERANCE: f64 = 0.02;
/// Largest absolute difference in the 2.5% and 97.5% quantiles.
pub const QUANTILE_TOLERANCE: f64 = 0.05;

/// Summary statistics used to compare runs: mean, 2.5% and 97.5% quantiles.
pub fn summarize_means(means: &[f64]) -> (f64, f64, f64) {
    let mut sorted = means.to_vec();
    sorted.sort_by(f64::total_cmp);
    (crate::stats::mean(&sorted), quantile_sorted(&sorted, 0.025), quantile_sorted(&sorted, 0.975))
}

/// Runs the chains twice with the same seed, once from `reference` (or from
/// the prior when `None`) and once from the prior, and compares the
/// posteriors of `J`. The check passes when the means differ by less than
/// [`MEAN_TOLERANCE`], both quantiles by less than [`QUANTILE_TOLERANCE`],
/// and both runs are individually converged.
pub fn convergence_check(
    data: &JDataset,
    hyper: &Hyperparameters,
    config: &ChainConfig,
    reference: Option<&ModelState>,
) -> Result<ConvergenceReport> {
    let a = run_chains_from(data, hyper, config, reference)?;
    let b = run_chains_from(data, hyper, config, None)?;
    Ok(compare_runs(&a, &b))
}

/// The comparison half of [`convergence_check`].
pub fn compare_runs(a: &ChainTrace, b: &ChainTrace) -> ConvergenceReport {
    let (ma, la, ha) = summarize_means(&a.retained_means);
    let (mb, lb, hb) = summarize_means(&b.retained_means);
    let mean_difference = (ma - mb).abs();
    let q025_difference = (la - lb).abs();
    let q975_difference = (ha - hb).abs();
    let pass = mean_difference < MEAN_TOLERANCE
        && q025_difference < QUANTILE_TOLERANCE
        && q975_difference < QUANTILE_TOLERANCE
        && a.converged()
        && b.converged();
    ConvergenceReport {
        mean_difference,
        q025_difference,
        q975_difference,
        rhat: [a.rhat(), b.rhat()],
        ess: [a.ess(), b.ess()],
        pass,
    }
}
