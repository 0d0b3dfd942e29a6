//! Betting scenario files.
//!
//! ```toml
//! rounds = 100000
//! initial_stake = 1.0
//! [channel]
//! kind = "gaussian"      # or "coin" with `flip`
//! signal_var = 1.0
//! noise_var = 1.0
//! [[algorithms]]
//! kind = "bayes"         # "prior", "gaussian" (slope, variance), "coin" (agree)
//! ```

use std::path::Path;

use asi_core::betting::{
    simulate_betting, BettingOutcome, BettingScenario, CoinChannel, CoinPredictor, GaussianChannel, GaussianPredictor,
    Predictor,
};
use asi_core::RandomStream;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Gaussian { signal_var: f64, noise_var: f64 },
    Coin { flip: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    /// Exact posterior of the channel.
    Bayes,
    /// The reference distribution itself.
    Prior,
    Gaussian { slope: f64, variance: f64 },
    Coin { agree: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub rounds: usize,
    #[serde(default = "one")]
    pub initial_stake: f64,
    pub channel: ChannelSpec,
    pub algorithms: Vec<AlgorithmSpec>,
}

fn one() -> f64 {
    1.0
}

/// Result of a run, with the analytic `J` of each algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub outcome: BettingOutcome,
    pub analytic_j: Vec<f64>,
}

impl ScenarioSpec {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        toml::from_str(&text).map_err(|e| CliError::Config { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn run(&self, rs: &mut RandomStream) -> CliResult<ScenarioRun> {
        if self.algorithms.is_empty() {
            return Err(CliError::Input("scenario has no algorithms".into()));
        }
        match self.channel {
            ChannelSpec::Gaussian { signal_var, noise_var } => {
                let ch = GaussianChannel::new(signal_var, noise_var)?;
                let predictors = self
                    .algorithms
                    .iter()
                    .map(|a| match *a {
                        AlgorithmSpec::Bayes => Ok(ch.bayes_predictor()),
                        AlgorithmSpec::Prior => Ok(ch.prior_predictor()),
                        AlgorithmSpec::Gaussian { slope, variance } if variance > 0.0 && slope.is_finite() => {
                            Ok(GaussianPredictor { slope, variance })
                        }
                        ref other => Err(CliError::Input(format!("{other:?} does not fit a gaussian channel"))),
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                let analytic_j = predictors.iter().map(|p| p.analytic_j(&ch)).collect();
                let algorithms = predictors.into_iter().map(|p| Box::new(p) as Box<dyn Predictor>).collect();
                let mut sc = BettingScenario { sampler: ch, algorithms, initial_stake: self.initial_stake, rounds: self.rounds };
                Ok(ScenarioRun { outcome: simulate_betting(rs, &mut sc)?, analytic_j })
            }
            ChannelSpec::Coin { flip } => {
                let ch = CoinChannel::new(flip)?;
                let predictors = self
                    .algorithms
                    .iter()
                    .map(|a| match *a {
                        AlgorithmSpec::Bayes => Ok(CoinPredictor { agree: 1.0 - flip }),
                        AlgorithmSpec::Prior => Ok(CoinPredictor { agree: 0.5 }),
                        AlgorithmSpec::Coin { agree } if (0.0..=1.0).contains(&agree) => Ok(CoinPredictor { agree }),
                        ref other => Err(CliError::Input(format!("{other:?} does not fit a coin channel"))),
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                let analytic_j = predictors.iter().map(|p| p.analytic_j(&ch)).collect();
                let algorithms = predictors.into_iter().map(|p| Box::new(p) as Box<dyn Predictor>).collect();
                let mut sc = BettingScenario { sampler: ch, algorithms, initial_stake: self.initial_stake, rounds: self.rounds };
                Ok(ScenarioRun { outcome: simulate_betting(rs, &mut sc)?, analytic_j })
            }
        }
    }
}
