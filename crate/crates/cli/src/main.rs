//! `pwnorm`: evaluate partition-weight norms and run the certification suite.
//!
//! Exit status is 0 on success, 1 when a certification fails and 2 for usage
//! or validation errors.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "pwnorm", version, about = "Partition-weight norms and their certification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file (written atomically); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format; each command has its own default (a plain number for
    /// norm and square, CSV for haar-table, JSON otherwise).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Extra detail: per-pair breakdowns, per-report summaries, timings.
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Family norm of a coefficient vector.
    Norm(NormArgs),
    /// Square-function norm of a coefficient vector in a basis.
    Square(SquareArgs),
    /// Run certification experiments.
    Verify(VerifyArgs),
    /// Closed-form Haar weights against direct integration.
    HaarTable(HaarTableArgs),
    /// Draw random norming functions.
    SampleG(SampleGArgs),
}

#[derive(Args, Debug)]
pub struct NormArgs {
    #[arg(long)]
    pub p: f64,
    /// Coefficients JSON: {"a": [...]}.
    #[arg(long)]
    pub coeffs: PathBuf,
    /// Family JSON: {"pairs": [{"partition": {"blocks": ...}, "weights": {"w": ...}}]}.
    #[arg(long)]
    pub family: PathBuf,
}

#[derive(Args, Debug)]
pub struct SquareArgs {
    /// Required unless the basis descriptor carries its own p.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub coeffs: PathBuf,
    /// Basis descriptor JSON, e.g. {"kind": "rademacher", "n": 4}.
    #[arg(long)]
    pub basis: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Experiment to run; repeatable.
    #[arg(long = "experiment", value_name = "NAME", required_unless_present = "all")]
    pub experiments: Vec<String>,
    /// Run every experiment.
    #[arg(long, conflicts_with = "experiments")]
    pub all: bool,
    /// Single p instead of the default grid {2.5, 3, 4, 6}.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = pwnorm_core::experiments::DEFAULT_TRIALS)]
    pub trials: usize,
    /// Maximum Haar level M for the haar experiment.
    #[arg(long, default_value_t = 6)]
    pub max_level: u32,
    /// Basis descriptor JSON replacing the generated bases.
    #[arg(long)]
    pub basis: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HaarTableArgs {
    /// Level n of the norming function (b has 2^{n-1} entries).
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub p: f64,
    /// Comma-separated non-negative entries of b with unit l_{p/(p-2)} norm.
    #[arg(long, value_delimiter = ',')]
    pub b: Vec<f64>,
    /// Smallest Haar level m in the table.
    #[arg(long, default_value_t = 0)]
    pub min_level: u32,
    /// Largest Haar level m in the table; defaults to n + 2.
    #[arg(long)]
    pub max_level: Option<u32>,
}

#[derive(Args, Debug)]
pub struct SampleGArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub seed: u64,
    /// Grid level of the sampled functions.
    #[arg(long, default_value_t = 4)]
    pub max_level: u32,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = Sampler::SquaredNormal)]
    pub sampler: Sampler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sampler {
    SquaredNormal,
    Uniform,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn certification(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<pwnorm_core::Error> for CliError {
    fn from(e: pwnorm_core::Error) -> Self {
        Self::usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pwnorm: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
