//! Command-line front end.
//!
//! Each subcommand reads a flat configuration file, runs one estimator and
//! writes CSV/JSON files plus `manifest.json` into the output directory.
//! Exit codes: 0 success, 2 configuration or parameter error, 3 failed
//! oracle check, 4 resource budget refusal, 1 I/O failure.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{Config, ConfigError};

use crate::error::Error;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "PERC_SEED";

#[derive(Debug, Parser)]
#[command(name = "lrperc", version, about = "Scale-free long-range percolation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed (overridden by PERC_SEED when set).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Analytic phase class over an (alpha, beta) grid.
    Phase,
    /// Percolation proxy along a lambda grid on coupled samples.
    Theta,
    /// Boundary-reach crossing brackets across box radii.
    LambdaC,
    /// Degree histogram and tail exponent of one sampled box.
    Degree,
    /// Graph-distance scaling in the parameters' regime.
    Distance,
    /// Largest-cluster frequencies against the finite-box bound.
    Boxes,
    /// Bad-box frequency of the renormalization hierarchy.
    Renorm,
    /// Bundled exact-versus-Monte-Carlo suite.
    OracleCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Phase => "phase",
            Command::Theta => "theta",
            Command::LambdaC => "lambda-c",
            Command::Degree => "degree",
            Command::Distance => "distance",
            Command::Boxes => "boxes",
            Command::Renorm => "renorm",
            Command::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Model { context: String, source: Error },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("oracle check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model { source: Error::Budget(_), .. } => 4,
            CliError::Model { .. } => 2,
            CliError::CheckFailed(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Runs a parsed invocation and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("lrperc {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

/// Parses `args` (program name first) and runs.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let started = chrono::Utc::now().to_rfc3339();
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| ConfigError { line: None, msg: format!("cannot read {}: {e}", p.display()) })?,
        None => String::new(),
    };
    let cfg = Config::parse(&text)?;
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(v) => Some(v.trim().parse::<u64>().map_err(|_| ConfigError {
            line: None,
            msg: format!("{SEED_ENV} = {v:?} is not an unsigned 64-bit integer"),
        })?),
        Err(_) => None,
    };
    let file_seed = cfg.get::<u64>("run", "seed", Some(0))?;
    let seed = env_seed.or(cli.seed).unwrap_or(file_seed);
    cfg.set_resolved("run", "seed", seed.to_string());
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ConfigError { line: None, msg: format!("cannot start {threads} threads: {e}") })?;
    let plan = commands::Plan::read(cli.command, &cfg)?;
    cfg.reject_unknown()?;
    let ctx = output::RunContext { command: cli.command.name().into(), seed, resolved_config: cfg.resolved_text() };
    let mut outputs = pool.install(|| plan.run(seed))?;
    let failure = outputs.failure.take();
    let written = outputs.into_files(&ctx).write(&cli.out, &ctx, &started)?;
    if let Some(msg) = failure {
        return Err(CliError::CheckFailed(msg));
    }
    Ok(written)
}
