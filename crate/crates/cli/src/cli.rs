//! Argument definitions, shared by the binary and by `replay`.

use std::path::PathBuf;

use asi_core::asi::Units;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "asi", version, about = "Apparent Shannon information of a prediction algorithm, with its posterior")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute j values from per-outcome log densities.
    Jcompute(JcomputeArgs),
    /// Fit the mixture model to j values and summarize the posterior of J.
    Estimate(EstimateArgs),
    /// Quantiles of J implied by the prior alone.
    PriorCheck(PriorCheckArgs),
    /// Draw synthetic j values from a given or prior-drawn state.
    Synth(SynthArgs),
    /// Simulate the betting game.
    Bet(BetArgs),
    /// Run the chains from two starting points and compare.
    Converge(ConvergeArgs),
    /// Rerun a command from its manifest and check the outputs match.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitsArg {
    Nepers,
    Bits,
}

impl From<UnitsArg> for Units {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Nepers => Units::Nepers,
            UnitsArg::Bits => Units::Bits,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunOptions {
    /// TOML file with [hyperparameters], [chain] and [output] tables.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, env = "ASI_SEED")]
    pub seed: Option<u64>,
    /// Worker threads for the chains (results do not depend on this).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Where to write the run manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct JcomputeArgs {
    /// Delimited table with log_q and log_p (or log_q0) columns.
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// j file, one value per line.
    pub input: PathBuf,
    #[command(flatten)]
    pub run: RunOptions,
    #[arg(long, value_enum, default_value = "nepers")]
    pub units: UnitsArg,
    /// Summary document (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// CDF of the retained draws of J.
    #[arg(long)]
    pub cdf: Option<PathBuf>,
    /// Histogram of the retained draws of J.
    #[arg(long)]
    pub hist: Option<PathBuf>,
    /// Histogram bins (default from the config, 50).
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PriorCheckArgs {
    #[command(flatten)]
    pub run: RunOptions,
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    #[arg(long, value_enum, default_value = "nepers")]
    pub units: UnitsArg,
    /// Report file (JSON); printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub run: RunOptions,
    /// Generating state (JSON); drawn from the prior when absent.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(short, long)]
    pub n: usize,
    /// j file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the generating state and its true J.
    #[arg(long)]
    pub state_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BetArgs {
    /// Scenario file (TOML).
    pub scenario: PathBuf,
    #[arg(long, env = "ASI_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Trajectory table (CSV).
    #[arg(long)]
    pub out: PathBuf,
    /// Write every `stride`-th round (the last round is always written).
    #[arg(long, default_value_t = 100)]
    pub stride: usize,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    /// j file.
    pub input: PathBuf,
    #[command(flatten)]
    pub run: RunOptions,
    /// Starting state for the first run (JSON, e.g. from `synth --state-out`);
    /// the prior when absent.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Report file (JSON); printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
