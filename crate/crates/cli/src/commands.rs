//! The `asi` subcommands. Each returns the process exit code: 0 on success,
//! 2 when the chains did not converge; errors map to 1 in `main`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use asi_core::asi::{compute_j, point_estimate, relative_j, split_finite, PosteriorSummary, Units};
use asi_core::mcmc::{compare_runs, ChainConfig, ConvergenceReport};
use asi_core::model::{mixture_mean, prior_sample, simulate_data};
use asi_core::stats::quantile_sorted;
use asi_core::{JDataset, ModelState, RandomStream};
use serde::{Deserialize, Serialize};

use crate::cli::{
    BetArgs, Cli, Command, ConvergeArgs, EstimateArgs, JcomputeArgs, PriorCheckArgs, ReplayArgs, RunOptions, SynthArgs,
};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::formats::{cdf_text, fmt_f64, histogram, histogram_text, j_file_text, read_j_file, read_records, write_text};
use crate::manifest::{now_ms, FileDigest, RunManifest};
use crate::parallel::{default_threads, run_chains_parallel};
use crate::scenario::ScenarioSpec;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_UNCONVERGED: u8 = 2;

/// A generating state with its true `J`, as written by `synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    pub true_j: f64,
    pub state: ModelState,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StateFile {
    Document(StateDocument),
    Bare(ModelState),
}

/// Reads a state written by `synth --state-out`, or a bare state.
pub fn read_state(path: &Path) -> CliResult<ModelState> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let state = match serde_json::from_str::<StateFile>(&text)? {
        StateFile::Document(d) => d.state,
        StateFile::Bare(s) => s,
    };
    state.validate()?;
    Ok(state)
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// What a command read and wrote, for its manifest.
#[derive(Debug, Default)]
struct Record {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    config_digest: Option<String>,
    seed: Option<u64>,
}

/// Runs a parsed command line. `args` is the raw argument list (without the
/// program name), stored in the manifest; `record = false` skips writing it.
pub fn execute(cli: &Cli, args: &[String], record: bool) -> CliResult<u8> {
    let started = now_ms();
    let mut rec = Record::default();
    let (name, manifest, code) = match &cli.command {
        Command::Jcompute(a) => ("jcompute", a.manifest.clone(), jcompute(a, &mut rec)?),
        Command::Estimate(a) => ("estimate", a.run.manifest.clone(), estimate(a, &mut rec)?),
        Command::PriorCheck(a) => ("prior-check", a.run.manifest.clone(), prior_check(a, &mut rec)?),
        Command::Synth(a) => ("synth", a.run.manifest.clone(), synth(a, &mut rec)?),
        Command::Bet(a) => ("bet", a.manifest.clone(), bet(a, &mut rec)?),
        Command::Converge(a) => ("converge", a.run.manifest.clone(), converge(a, &mut rec)?),
        Command::Replay(a) => return replay(a),
    };
    if let (true, Some(path)) = (record, manifest) {
        let digests = |paths: &[PathBuf]| paths.iter().map(|p| FileDigest::of(p)).collect::<CliResult<Vec<_>>>();
        RunManifest {
            command: name.into(),
            args: args.to_vec(),
            inputs: digests(&rec.inputs)?,
            outputs: digests(&rec.outputs)?,
            config_digest: rec.config_digest,
            seed: rec.seed,
            version: env!("CARGO_PKG_VERSION").into(),
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
        }
        .write(&path)?;
    }
    Ok(code)
}

/// Config with the seed override applied, noting inputs in the record.
fn resolve(run: &RunOptions, rec: &mut Record) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(run.config.as_deref())?;
    if let Some(seed) = run.seed {
        cfg.chain.seed = seed;
    }
    if let Some(p) = &run.config {
        rec.inputs.push(p.clone());
    }
    rec.config_digest = Some(cfg.digest());
    rec.seed = Some(cfg.chain.seed);
    Ok(cfg)
}

fn threads(run: &RunOptions, chains: usize) -> usize {
    run.threads.unwrap_or_else(default_threads).clamp(1, chains.max(1))
}

fn jcompute(a: &JcomputeArgs, rec: &mut Record) -> CliResult<u8> {
    let table = read_records(&a.input)?;
    rec.inputs.push(a.input.clone());
    let js = match &table.log_q0 {
        Some(q0) => table.records.iter().zip(q0).map(|(r, &q0)| relative_j(r.log_q, q0)).collect::<Result<Vec<_>, _>>()?,
        None => table.records.iter().map(compute_j).collect::<Result<Vec<_>, _>>()?,
    };
    if js.is_empty() {
        return Err(CliError::Input(format!("{}: no records", a.input.display())));
    }
    let pe = point_estimate(&js)?;
    let neg_inf = js.iter().filter(|&&j| j == f64::NEG_INFINITY).count();
    write_text(&a.output, &j_file_text(&js, pe, neg_inf))?;
    rec.outputs.push(a.output.clone());
    println!("n={} point_estimate={} neg_inf={}", js.len(), fmt_f64(pe), neg_inf);
    Ok(EXIT_OK)
}

fn load_dataset(path: &Path, rec: &mut Record) -> CliResult<(JDataset, usize)> {
    let raw = read_j_file(path)?;
    rec.inputs.push(path.to_path_buf());
    let (finite, excluded) = split_finite(&raw)?;
    if finite.is_empty() {
        return Err(CliError::Input(format!("{}: every j value is -inf", path.display())));
    }
    Ok((JDataset::new(finite, path.display().to_string())?, excluded))
}

#[derive(Serialize)]
struct EstimateReport<'a> {
    seed: u64,
    unconverged: bool,
    #[serde(flatten)]
    summary: &'a PosteriorSummary,
}

fn estimate(a: &EstimateArgs, rec: &mut Record) -> CliResult<u8> {
    let cfg = resolve(&a.run, rec)?;
    let (data, excluded) = load_dataset(&a.input, rec)?;
    let trace = run_chains_parallel(&data, &cfg.hyperparameters, &cfg.chain, None, threads(&a.run, cfg.chain.chains))?;
    let units: Units = a.units.into();
    let summary = PosteriorSummary::from_trace(&data, excluded, &trace)?.in_units(units);
    let report = EstimateReport { seed: cfg.chain.seed, unconverged: !summary.converged, summary: &summary };
    write_json(Some(&a.out), &report)?;
    rec.outputs.push(a.out.clone());

    let mut draws: Vec<f64> = trace.retained_means.iter().map(|v| v * units.factor()).collect();
    draws.sort_by(f64::total_cmp);
    if let Some(p) = &a.cdf {
        write_text(p, &cdf_text(&draws))?;
        rec.outputs.push(p.clone());
    }
    if let Some(p) = &a.hist {
        let bins = a.bins.unwrap_or(cfg.output.histogram_bins).max(1);
        write_text(p, &histogram_text(&histogram(&draws, bins)))?;
        rec.outputs.push(p.clone());
    }
    println!(
        "J mean {} median {} 95% [{}, {}] {:?}; rhat {:.4} ess {:.0}{}",
        summary.mean,
        summary.median,
        summary.q025,
        summary.q975,
        units,
        summary.rhat,
        summary.ess,
        if summary.converged { "" } else { " UNCONVERGED" }
    );
    Ok(if summary.converged { EXIT_OK } else { EXIT_UNCONVERGED })
}

#[derive(Debug, Serialize)]
pub struct PriorReport {
    pub draws: usize,
    pub seed: u64,
    pub units: Units,
    pub mean: f64,
    /// `(probability, value)` pairs.
    pub quantiles: Vec<(f64, f64)>,
}

pub const PRIOR_QUANTILES: [f64; 7] = [0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975];

/// Mixture means of `draws` independent prior states.
pub fn prior_mixture_means(cfg: &RunConfig, draws: usize) -> CliResult<Vec<f64>> {
    let mut rs = RandomStream::new(cfg.chain.seed, 0);
    (0..draws)
        .map(|_| Ok(mixture_mean(&prior_sample(&mut rs, &cfg.hyperparameters)?)?))
        .collect()
}

fn prior_check(a: &PriorCheckArgs, rec: &mut Record) -> CliResult<u8> {
    if a.draws == 0 {
        return Err(CliError::Input("--draws must be positive".into()));
    }
    let cfg = resolve(&a.run, rec)?;
    let units: Units = a.units.into();
    let mut means: Vec<f64> = prior_mixture_means(&cfg, a.draws)?.into_iter().map(|v| v * units.factor()).collect();
    means.sort_by(f64::total_cmp);
    let report = PriorReport {
        draws: a.draws,
        seed: cfg.chain.seed,
        units,
        mean: asi_core::stats::mean(&means),
        quantiles: PRIOR_QUANTILES.iter().map(|&p| (p, quantile_sorted(&means, p))).collect(),
    };
    write_json(a.out.as_deref(), &report)?;
    rec.outputs.extend(a.out.clone());
    Ok(EXIT_OK)
}

fn synth(a: &SynthArgs, rec: &mut Record) -> CliResult<u8> {
    let cfg = resolve(&a.run, rec)?;
    // Stream 0 draws the state, stream 1 the data, so a given state yields
    // the same data whether or not it came from the prior.
    let state = match &a.state {
        Some(p) => {
            rec.inputs.push(p.clone());
            read_state(p)?
        }
        None => prior_sample(&mut RandomStream::new(cfg.chain.seed, 0), &cfg.hyperparameters)?,
    };
    let true_j = mixture_mean(&state)?;
    let js = simulate_data(&mut RandomStream::new(cfg.chain.seed, 1), &state, a.n);
    if js.is_empty() {
        return Err(CliError::Input("-n must be positive".into()));
    }
    write_text(&a.out, &j_file_text(&js, point_estimate(&js)?, 0))?;
    rec.outputs.push(a.out.clone());
    if let Some(p) = &a.state_out {
        let mut stripped = state.clone();
        stripped.assignments.clear();
        stripped.alphas.clear();
        write_json(Some(p), &StateDocument { true_j, state: stripped })?;
        rec.outputs.push(p.clone());
    }
    println!("n={} true_j={}", js.len(), fmt_f64(true_j));
    Ok(EXIT_OK)
}

fn bet(a: &BetArgs, rec: &mut Record) -> CliResult<u8> {
    let scenario = ScenarioSpec::load(&a.scenario)?;
    rec.inputs.push(a.scenario.clone());
    rec.seed = Some(a.seed);
    if a.stride == 0 {
        return Err(CliError::Input("--stride must be positive".into()));
    }
    let run = scenario.run(&mut RandomStream::new(a.seed, 0))?;
    let piles = &run.outcome.log_piles;
    let mut text = String::from("round");
    for i in 0..piles.len() {
        let _ = write!(text, ",log_pile_{i}");
    }
    text.push('\n');
    for t in 0..scenario.rounds {
        if (t + 1) % a.stride == 0 || t + 1 == scenario.rounds {
            let _ = write!(text, "{}", t + 1);
            for p in piles {
                let _ = write!(text, ",{}", fmt_f64(p[t]));
            }
            text.push('\n');
        }
    }
    write_text(&a.out, &text)?;
    rec.outputs.push(a.out.clone());
    for (i, ((g, se), j)) in
        run.outcome.growth_rates.iter().zip(&run.outcome.standard_errors).zip(&run.analytic_j).enumerate()
    {
        println!("algorithm {i}: growth {} se {} analytic J {}", fmt_f64(*g), fmt_f64(*se), fmt_f64(*j));
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct ConvergeOutput<'a> {
    seed: u64,
    means: [f64; 2],
    #[serde(flatten)]
    report: &'a ConvergenceReport,
}

fn converge(a: &ConvergeArgs, rec: &mut Record) -> CliResult<u8> {
    let cfg = resolve(&a.run, rec)?;
    let (data, _) = load_dataset(&a.input, rec)?;
    let reference = match &a.reference {
        Some(p) => {
            rec.inputs.push(p.clone());
            Some(read_state(p)?)
        }
        None => None,
    };
    let chain: &ChainConfig = &cfg.chain;
    let t = threads(&a.run, chain.chains);
    let first = run_chains_parallel(&data, &cfg.hyperparameters, chain, reference.as_ref(), t)?;
    let second = run_chains_parallel(&data, &cfg.hyperparameters, chain, None, t)?;
    let report = compare_runs(&first, &second);
    let mean = |v: &[f64]| asi_core::stats::mean(v);
    let out = ConvergeOutput {
        seed: chain.seed,
        means: [mean(&first.retained_means), mean(&second.retained_means)],
        report: &report,
    };
    write_json(a.out.as_deref(), &out)?;
    rec.outputs.extend(a.out.clone());
    if a.out.is_some() {
        println!("mean difference {} pass {}", fmt_f64(report.mean_difference), report.pass);
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_UNCONVERGED })
}

fn replay(a: &ReplayArgs) -> CliResult<u8> {
    use clap::Parser;
    let m = RunManifest::read(&a.manifest)?;
    let changed = m.changed_inputs()?;
    if !changed.is_empty() {
        return Err(CliError::Input(format!("inputs changed since the run: {changed:?}")));
    }
    let argv = std::iter::once("asi".to_string()).chain(m.args.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Input(format!("manifest arguments: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::Input("a manifest cannot replay a replay".into()));
    }
    let code = execute(&cli, &m.args, false)?;
    let differ = m.changed_outputs()?;
    if differ.is_empty() {
        println!("replay reproduced {} output(s)", m.outputs.len());
        Ok(code)
    } else {
        Err(CliError::Input(format!("outputs differ from the manifest: {differ:?}")))
    }
}
