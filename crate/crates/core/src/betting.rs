//! The multiplicative betting game whose log-growth rate is the ASI.
//!
//! Each round an outcome `x` and side information `y` are drawn. Every
//! player's pile is multiplied by `Q_y(x) / P(x)`, its prediction density
//! over the reference density at the realized outcome. In the log domain the
//! pile is the running sum of `j` values, and a zero multiplier sends it to
//! `-inf` for good.

use alloc::boxed::Box;
use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;

use crate::error::{positive, Error, Result};
use crate::samplers::{standard_normal, RandomStream};
use crate::special::gaussian_logpdf_unchecked;

/// Source of `(x, y)` pairs with a known reference density for `x`.
pub trait JointSampler {
    fn draw(&mut self, rs: &mut RandomStream) -> (f64, f64);
    /// Log reference density (or mass) of `x`.
    fn prior_logpdf(&self, x: f64) -> f64;
}

/// A prediction algorithm: maps side information `y` to a log density over
/// outcomes `x`.
pub trait Predictor {
    fn log_density(&self, y: f64, x: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64> Predictor for F {
    fn log_density(&self, y: f64, x: f64) -> f64 {
        self(y, x)
    }
}

pub struct BettingScenario<S> {
    pub sampler: S,
    pub algorithms: Vec<Box<dyn Predictor>>,
    pub initial_stake: f64,
    pub rounds: usize,
}

impl<S> core::fmt::Debug for BettingScenario<S> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("BettingScenario")
            .field("algorithms", &self.algorithms.len())
            .field("initial_stake", &self.initial_stake)
            .field("rounds", &self.rounds)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BettingOutcome {
    /// `log_piles[i][t]`: log pile of algorithm `i` after round `t + 1`.
    pub log_piles: Vec<Vec<f64>>,
    /// `(log pile - log M) / rounds` per algorithm.
    pub growth_rates: Vec<f64>,
    /// Standard error of each growth rate from the per-round `j` spread
    /// (NaN once a pile is lost).
    pub standard_errors: Vec<f64>,
}

/// Plays `scenario.rounds` rounds.
pub fn simulate_betting<S: JointSampler>(rs: &mut RandomStream, scenario: &mut BettingScenario<S>) -> Result<BettingOutcome> {
    positive("initial stake", scenario.initial_stake)?;
    if scenario.rounds == 0 {
        return Err(Error::Input("at least one round is needed".into()));
    }
    let k = scenario.algorithms.len();
    let log_m = scenario.initial_stake.ln();
    let mut log_piles: Vec<Vec<f64>> = (0..k).map(|_| Vec::with_capacity(scenario.rounds)).collect();
    let mut current = alloc::vec![log_m; k];
    let mut sum_sq = alloc::vec![0.0; k];
    for _ in 0..scenario.rounds {
        let (x, y) = scenario.sampler.draw(rs);
        let lp = scenario.sampler.prior_logpdf(x);
        for (i, alg) in scenario.algorithms.iter().enumerate() {
            if current[i] != f64::NEG_INFINITY {
                let j = alg.log_density(y, x) - lp;
                current[i] = if j == f64::NEG_INFINITY { j } else { current[i] + j };
                sum_sq[i] += j * j;
            }
            log_piles[i].push(current[i]);
        }
    }
    let n = scenario.rounds as f64;
    let growth_rates: Vec<f64> = current.iter().map(|&c| (c - log_m) / n).collect();
    let standard_errors = growth_rates
        .iter()
        .zip(&sum_sq)
        .map(|(&g, &ss)| if g.is_finite() && n > 1.0 { ((ss / n - g * g) * n / (n - 1.0)).max(0.0).sqrt() / n.sqrt() } else { f64::NAN })
        .collect();
    Ok(BettingOutcome { log_piles, growth_rates, standard_errors })
}

/// Mean final log pile across replicate runs, per algorithm.
pub fn mean_log_pile(outcomes: &[BettingOutcome]) -> Vec<f64> {
    let Some(first) = outcomes.first() else { return Vec::new() };
    (0..first.log_piles.len())
        .map(|i| {
            outcomes.iter().map(|o| *o.log_piles[i].last().expect("at least one round")).sum::<f64>() / outcomes.len() as f64
        })
        .collect()
}

/// `x ~ N(0, signal_var)`, `y = x + N(0, noise_var)`; the reference is the
/// marginal of `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChannel {
    pub signal_var: f64,
    pub noise_var: f64,
}

impl GaussianChannel {
    pub fn new(signal_var: f64, noise_var: f64) -> Result<Self> {
        positive("signal variance", signal_var)?;
        positive("noise variance", noise_var)?;
        Ok(Self { signal_var, noise_var })
    }

    /// The exact posterior of `x` given `y`.
    pub fn bayes_predictor(&self) -> GaussianPredictor {
        let total = self.signal_var + self.noise_var;
        GaussianPredictor { slope: self.signal_var / total, variance: self.signal_var * self.noise_var / total }
    }

    /// Ignores `y` and predicts the reference.
    pub fn prior_predictor(&self) -> GaussianPredictor {
        GaussianPredictor { slope: 0.0, variance: self.signal_var }
    }

    /// Mutual information `ln(1 + signal/noise) / 2`.
    pub fn mutual_information(&self) -> f64 {
        0.5 * (self.signal_var / self.noise_var).ln_1p()
    }
}

impl JointSampler for GaussianChannel {
    fn draw(&mut self, rs: &mut RandomStream) -> (f64, f64) {
        let x = standard_normal(rs) * self.signal_var.sqrt();
        (x, x + standard_normal(rs) * self.noise_var.sqrt())
    }

    fn prior_logpdf(&self, x: f64) -> f64 {
        gaussian_logpdf_unchecked(x, 0.0, 1.0 / self.signal_var)
    }
}

/// Predicts `x ~ N(slope * y, variance)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPredictor {
    pub slope: f64,
    pub variance: f64,
}

impl GaussianPredictor {
    /// Expected `j` on the given channel.
    pub fn analytic_j(&self, ch: &GaussianChannel) -> f64 {
        let a = self.slope;
        let mse = (1.0 - a) * (1.0 - a) * ch.signal_var + a * a * ch.noise_var;
        0.5 * (ch.signal_var / self.variance).ln() - 0.5 * mse / self.variance + 0.5
    }
}

impl Predictor for GaussianPredictor {
    fn log_density(&self, y: f64, x: f64) -> f64 {
        gaussian_logpdf_unchecked(x, self.slope * y, 1.0 / self.variance)
    }
}

/// Fair coin `x` in {0, 1}; `y` reports `x`, flipped with probability
/// `flip`. The reference is the fair coin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinChannel {
    pub flip: f64,
}

impl CoinChannel {
    pub fn new(flip: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip) {
            return Err(crate::error::domain("flip probability", flip));
        }
        Ok(Self { flip })
    }
}

impl JointSampler for CoinChannel {
    fn draw(&mut self, rs: &mut RandomStream) -> (f64, f64) {
        let x = if rs.random::<bool>() { 1.0 } else { 0.0 };
        let flipped = rs.random::<f64>() < self.flip;
        (x, if flipped { 1.0 - x } else { x })
    }

    fn prior_logpdf(&self, _x: f64) -> f64 {
        -core::f64::consts::LN_2
    }
}

/// Puts probability `agree` on `x = y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinPredictor {
    pub agree: f64,
}

impl CoinPredictor {
    pub fn analytic_j(&self, ch: &CoinChannel) -> f64 {
        let term = |w: f64, q: f64| if w == 0.0 { 0.0 } else { w * q.ln() };
        core::f64::consts::LN_2 + term(1.0 - ch.flip, self.agree) + term(ch.flip, 1.0 - self.agree)
    }
}

impl Predictor for CoinPredictor {
    fn log_density(&self, y: f64, x: f64) -> f64 {
        if x == y {
            self.agree.ln()
        } else {
            (1.0 - self.agree).ln()
        }
    }
}
