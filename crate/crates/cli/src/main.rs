//! Experiment runner: curve emission, coupled stability sweeps, moment
//! diagnostics, self-validation, and bound evaluation.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical-domain error,
//! 4 verification failure, 5 replica divergence.

mod commands;
mod config;
mod error;
mod report;

use clap::{Args, Parser, Subcommand};
use config::ConfigMap;
use error::CliError;
use report::OutputFormat;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "heavytail",
    version,
    about = "Heavy-tailed dynamics laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base seed for every random stream in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output path or stem; derived files get .csv / .json extensions.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Restrict output to one format (default: emit both CSV and JSON).
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Flat key = value config file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the tail-index curve g(alpha; d) as plot-ready CSV
    Gcurve(GcurveArgs),
    /// Coupled-chain stability sweep against the closed-form bounds
    StabilitySweep(SweepArgs),
    /// Empirical p-moment growth of stationary samples across sample sizes
    MomentDivergence(MomentArgs),
    /// Run the built-in verification checks and emit a pass/fail report
    Validate(ValidateArgs),
    /// Evaluate every closed-form bound and critical constant
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct GcurveArgs {
    /// Alpha grid: start:end:count or comma list, strictly inside (1, 2)
    #[arg(long)]
    alphas: Option<String>,
    /// Dimensions, comma separated
    #[arg(long)]
    ds: Option<String>,
    /// Per-dimension max normalization of the emitted curve
    #[arg(long)]
    normalize: Option<bool>,
}

#[derive(Args)]
struct SweepArgs {
    /// Loss model: quadratic-1d or dissipative-nonconvex
    #[arg(long)]
    model: Option<String>,
    /// Dataset sizes, comma separated
    #[arg(long)]
    ns: Option<String>,
    /// Tail indices, comma separated, each strictly inside (1, 2)
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Norm of the one-element dataset perturbation
    #[arg(long)]
    perturbation: Option<f64>,
    /// Surrogate loss cap
    #[arg(long)]
    cap: Option<f64>,
    /// Monte-Carlo draws for the population risk estimate
    #[arg(long)]
    pop_draws: Option<usize>,
    /// Fail (exit 4) if any empirical column exceeds its bound column
    #[arg(long)]
    consistency_mode: bool,
    /// Also dump full per-step trajectories of the first sweep row's
    /// first replicas to <out>_trajectories.csv
    #[arg(long)]
    dump_trajectories: bool,
}

#[derive(Args)]
struct MomentArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Moment orders, comma separated
    #[arg(long)]
    ps: Option<String>,
    /// Sample-cloud sizes, comma separated
    #[arg(long)]
    counts: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    /// Linear drift rate of the reference chain
    #[arg(long)]
    drift: Option<f64>,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Steps between harvested samples
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {}

#[derive(Args)]
struct BoundsArgs {
    /// Loss model supplying the constant bundle
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Dataset size entering rho = perturbation / n
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    perturbation: Option<f64>,
    /// Initial-iterate norm for the finite-horizon cases
    #[arg(long)]
    w_norm: Option<f64>,
    /// Override the external-unspecified contraction prefactor C1
    #[arg(long)]
    c1: Option<f64>,
    /// Override the external-unspecified contraction rate lambda
    #[arg(long)]
    lambda: Option<f64>,
    /// Override the external-unspecified short-time moment constant C
    #[arg(long)]
    big_c: Option<f64>,
    /// Override the external-unspecified discretization constant Q
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    cap: Option<f64>,
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let cfg = ConfigMap::load(cli.config.as_deref())?;
    let seed = cfg.resolve("seed", cli.seed, 42)?;
    let out = cli
        .out
        .or_else(|| std::env::var("HEAVYTAIL_OUT").ok().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("report"));

    let report = match &cli.command {
        Command::Gcurve(args) => commands::gcurve::run(args, &cfg, seed)?,
        Command::StabilitySweep(args) => commands::sweep::run(args, &cfg, seed)?,
        Command::MomentDivergence(args) => commands::moments::run(args, &cfg, seed)?,
        Command::Validate(_) => commands::validate::run(&cfg, seed)?,
        Command::Bounds(args) => commands::bounds_cmd::run(args, &cfg, seed)?,
    };

    report.report.write(&out, cli.format)?;
    for (suffix, content) in &report.extra_files {
        let base = match out.extension().and_then(|e| e.to_str()) {
            Some("csv") | Some("json") => out.with_extension(""),
            _ => out.clone(),
        };
        let mut path = base.into_os_string();
        path.push(suffix);
        std::fs::write(&path, content)
            .map_err(|e| CliError::Config(format!("cannot write {path:?}: {e}")))?;
    }
    if let Some(failure) = report.failure {
        eprintln!("{failure}");
        return Err(failure);
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
