//! Scenario-driven front end for the `nonmarkov` library.
//!
//! `nonmarkov <command> --config scenario.json --out results/ [--seed N] [--eps E]`
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 1 I/O failure.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub mod commands;
pub mod output;
pub mod scenario;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("numerical failure: {0}")]
    Numerical(#[from] nonmarkov::Error),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(vec![msg.into()])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Evolve,
    Blp,
    Rhp,
    Divisibility,
    Helstrom,
    AncillaDistance,
    Nmqj,
    ClassicalCheck,
    CausalBreak,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Blp => "blp",
            Command::Rhp => "rhp",
            Command::Divisibility => "divisibility",
            Command::Helstrom => "helstrom",
            Command::AncillaDistance => "ancilla-distance",
            Command::Nmqj => "nmqj",
            Command::ClassicalCheck => "classical-check",
            Command::CausalBreak => "causal-break",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nonmarkov", version, about = "Non-Markovianity quantifiers for open quantum systems")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Scenario JSON file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Finite-difference step for the RHP measure; overrides the scenario.
    #[arg(long)]
    pub eps: Option<f64>,
}

/// Thread count from `NONMARKOV_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("NONMARKOV_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::invalid(format!("NONMARKOV_THREADS: expected a positive integer, got '{v}'")))?;
    // A second call in the same process (tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses, runs and writes artifacts. Returns the written paths.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    configure_threads()?;
    let mut scenario = scenario::parse_scenario(&cli.config)?;
    if let Some(seed) = cli.seed {
        scenario.seed = Some(seed);
    }
    if let Some(eps) = cli.eps {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(CliError::invalid("--eps: must be a positive number"));
        }
        scenario.eps = Some(eps);
    }
    commands::execute(cli.command, &scenario, &cli.out)
}
