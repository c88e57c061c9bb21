//! Command-line front end for GPN bounds.
//!
//! `gpn simulate` reproduces the simulation tables, `gpn analyze` bounds the
//! averaged GPN on a CSV dataset, `gpn sensitivity` traces the averaged GPN
//! across copula parameters and `gpn bounds` evaluates every formula at one
//! marginal point.
//!
//! Randomness flows from one 64-bit run seed (`--seed`, else the config
//! `seed`). Simulation cells, replicates, learner seeds and subsample draws
//! get child seeds through `gpn_core::rng::derive_seed`, so outputs do not
//! depend on `--threads`.
//!
//! Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gpn_core::dgp::POPULATION_DRAWS;
use gpn_core::CopulaFamily;

use crate::commands::{
    AnalyzeParams, BoundsParams, Report, SensitivityParams, SensitivitySource, SimulateParams,
};
pub use crate::config::RunConfig;
pub use crate::error::{CliError, Result};
use crate::manifest::Manifest;

/// Output directory when `--out` is not given.
pub const DEFAULT_OUT: &str = "gpn-out";

#[derive(Debug, Parser)]
#[command(name = "gpn", version, about = "Bounds on the general probability of necessity")]
pub struct Cli {
    /// Run seed; overrides `seed` in the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "JSON")]
    pub config: Option<PathBuf>,
    /// Output directory (`bounds` writes files only when given).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; all cores by default.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproduce a simulation table.
    Simulate(SimulateArgs),
    /// Averaged bounds with subsampling sds on a `y,z,x1..xd` CSV.
    Analyze(AnalyzeArgs),
    /// Averaged GPN over a grid of copula parameters.
    Sensitivity(SensitivityArgs),
    /// All bound formulas at one marginal point.
    Bounds(BoundsArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// 1: widths and errors per method and design; 2: copula misspecification.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub table: u8,
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    /// Replicates per cell.
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,
    /// Use the analytic margins instead of estimating them.
    #[arg(long)]
    pub oracle_marginals: bool,
    /// Covariate draws behind the true mean GPN (table 2).
    #[arg(long, default_value_t = POPULATION_DRAWS)]
    pub population_draws: usize,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub data: PathBuf,
    /// Skip the subsampling sds.
    #[arg(long)]
    pub no_subsample: bool,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    /// Dataset CSV; otherwise a simulated design is used.
    #[arg(long, conflicts_with = "case", required_unless_present = "case")]
    pub data: Option<PathBuf>,
    /// Simulated design: a, b or c.
    #[arg(long, value_parser = ["a", "b", "c"])]
    pub case: Option<String>,
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    #[arg(long)]
    pub oracle_marginals: bool,
    /// Grid `LO HI COUNT` of copula parameters.
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "COUNT"], allow_negative_numbers = true)]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// `P(Y(1) <= c1 | x)`.
    #[arg(long)]
    pub u1: f64,
    /// `P(Y(0) <= c0 | x)`.
    #[arg(long)]
    pub u0: f64,
    /// `P(Y(0) <= c1 | x)`; enables the monotonicity bound.
    #[arg(long)]
    pub u0_at_c1: Option<f64>,
    /// Copula parameter range `LO HI`.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub rho: Option<Vec<f64>>,
    /// Copula family for `--rho`; the config family by default.
    #[arg(long, value_parser = parse_family)]
    pub family: Option<CopulaFamily>,
}

fn parse_family(s: &str) -> std::result::Result<CopulaFamily, String> {
    s.parse().map_err(|e: gpn_core::GpnError| e.to_string())
}

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    /// Files written, manifest last; empty when nothing was written.
    pub written: Vec<PathBuf>,
}

/// Resolve the configuration, run the command and write its outputs.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    let report = pool.install(|| dispatch(&cli.command, &cfg))?;

    let out = match (&cli.command, &cli.out) {
        (Command::Bounds(_), None) => None,
        (_, out) => Some(out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))),
    };
    let written = match out {
        Some(dir) => {
            let manifest = Manifest {
                tool: "gpn",
                version: env!("CARGO_PKG_VERSION"),
                command: report.command,
                seed: cfg.seed,
                config: cfg.clone(),
                parameters: report.parameters.clone(),
                files: report.bundle.entries(),
                results: report.results.clone(),
            };
            report.bundle.write(&dir, &manifest)?
        }
        None => Vec::new(),
    };
    Ok(Outcome { report, written })
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Result<Report> {
    match command {
        Command::Simulate(a) => commands::simulate(
            &SimulateParams {
                table: a.table,
                n: a.n,
                seeds: a.seeds,
                oracle_marginals: a.oracle_marginals,
                population_draws: a.population_draws,
            },
            cfg,
        ),
        Command::Analyze(a) => {
            commands::analyze(&AnalyzeParams { data: a.data.clone(), subsample: !a.no_subsample }, cfg)
        }
        Command::Sensitivity(a) => {
            let source = match (&a.data, &a.case) {
                (Some(path), _) => SensitivitySource::Data(path.clone()),
                (None, Some(case)) => SensitivitySource::Simulated {
                    case: case.clone(),
                    n: a.n,
                    oracle_marginals: a.oracle_marginals,
                },
                (None, None) => return Err(CliError::Config("give --data or --case".into())),
            };
            let grid = match a.grid.as_deref() {
                None => None,
                Some(&[lo, hi, count]) => {
                    if count.fract() != 0.0 || count < 1.0 {
                        return Err(CliError::Config(format!("grid count {count} must be a positive integer")));
                    }
                    Some((lo, hi, count as usize))
                }
                Some(other) => return Err(CliError::Config(format!("--grid takes 3 values, got {}", other.len()))),
            };
            commands::sensitivity(&SensitivityParams { source, grid }, cfg)
        }
        Command::Bounds(a) => {
            let range = match a.rho.as_deref() {
                None => None,
                Some(&[lo, hi]) => Some((lo, hi)),
                Some(other) => return Err(CliError::Config(format!("--rho takes 2 values, got {}", other.len()))),
            };
            commands::bounds(
                &BoundsParams { u1: a.u1, u0: a.u0, u0_at_c1: a.u0_at_c1, range, family: a.family },
                cfg,
            )
        }
    }
}
