//! `elastic`: command-line front end for cloud decompositions, simulations and
//! exact stationary checks.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elastic_core::engine::Mode;

#[derive(Debug, Parser)]
#[command(name = "elastic", version, about = "Elastic interacting particle systems on the integer lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact cloud decomposition, stability verdict and speeds (JSON on stdout).
    Analyze(Common),
    /// Simulate and write trajectory.csv, observables.csv and summary.json.
    Simulate(Common),
    /// Two-particle stationary law, optionally compared with a simulation.
    Stationary(Common),
    /// Kolmogorov cycle check on the truncated gap chain.
    Reversibility(Common),
    /// Mean number of clouds over random environments.
    RandomEnv(Common),
    /// Write the CSV/JSON inputs consumed by the plotting scripts.
    PlotData(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Seed for every random draw; required by commands that sample.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Stop after this many events.
    #[arg(long, conflicts_with = "time")]
    pub events: Option<u64>,
    /// Stop at this physical time.
    #[arg(long)]
    pub time: Option<f64>,
    /// Record every k-th event.
    #[arg(long, conflicts_with = "stride_time")]
    pub stride: Option<u64>,
    /// Record every Δt of physical time.
    #[arg(long)]
    pub stride_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Elastic,
    Exclusion,
    Rank,
    JumpChain,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Elastic => Mode::Elastic,
            ModeArg::Exclusion => Mode::Exclusion,
            ModeArg::Rank => Mode::Rank,
            ModeArg::JumpChain => Mode::JumpChain,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

impl From<elastic_core::Error> for CliError {
    fn from(e: elastic_core::Error) -> Self {
        use elastic_core::Error::*;
        match e {
            InvalidInput(_) | Config(_) | UnsupportedMode(_) => CliError::Config(e.to_string()),
            Frozen | Precision(_) | NoStationaryLaw(_) | InsufficientData(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(c) => commands::analyze(c),
        Command::Simulate(c) => commands::simulate(c),
        Command::Stationary(c) => commands::stationary(c),
        Command::Reversibility(c) => commands::reversibility(c),
        Command::RandomEnv(c) => commands::random_env(c),
        Command::PlotData(c) => commands::plot_data(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
