//! Experiment driver for the freeprob toolkit.
//!
//! Every subcommand accepts `--seed`, `--out <path>` (stdout by default)
//! and `--config <path>` with flat `key = value` entries namespaced by
//! subcommand. Exit codes: 0 success, 2 precondition/gate failure,
//! 3 numeric non-convergence, 4 I/O or configuration error.

mod commands;
mod config;
mod csvout;

use clap::{Parser, Subcommand};
use config::Config;
use freeprob_core::bai::BaiError;
use freeprob_core::freeconv::ConvolveError;
use freeprob_core::matrix::MatrixError;
use freeprob_core::rates::RatesError;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Gate(String),
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Gate(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Config(_) | CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Gate(m) => write!(f, "precondition failure: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<ConvolveError> for CliError {
    fn from(e: ConvolveError) -> Self {
        match e {
            ConvolveError::NonConvergence { .. } | ConvolveError::ZeroDenominator { .. } => {
                CliError::Numeric(e.to_string())
            }
            ConvolveError::Precondition(_) | ConvolveError::Measure(_) => {
                CliError::Gate(e.to_string())
            }
        }
    }
}

impl From<BaiError> for CliError {
    fn from(e: BaiError) -> Self {
        match e {
            BaiError::QuadratureFailure { .. } => CliError::Numeric(e.to_string()),
            BaiError::ParameterViolation { .. } | BaiError::Measure(_) => {
                CliError::Gate(e.to_string())
            }
        }
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::EigenNonConvergence { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Gate(e.to_string()),
        }
    }
}

impl From<RatesError> for CliError {
    fn from(e: RatesError) -> Self {
        match e {
            RatesError::GateFailed(_)
            | RatesError::ZeroVariance
            | RatesError::MissingNormBounds(_) => CliError::Gate(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "freeprob", version, about = "Numerical free probability experiments")]
struct Cli {
    /// Base seed for all random streams of the experiment.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat key = value configuration file, namespaced per subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density/CDF/transform table of a semicircle law.
    Semicircle,
    /// Free additive convolution of two serialized measures.
    Convolve,
    /// Normalized free-sum distributions and their distance to the limit.
    Clt,
    /// Certified Kolmogorov-distance bound breakdown for a measure pair.
    Bai,
    /// Self-normalized sums of independent GUE matrices.
    GueSelfnorm,
    /// Operator-inequality report on seeded GUE families.
    Ineq,
    /// Least-squares decay fit of an (n, distance) series.
    RateFit,
    /// Exact atom calculus of the free convolution.
    Atoms,
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read config {path:?}: {e}")))?;
            Config::parse(&text).map_err(CliError::Config)?
        }
        None => Config::default(),
    };
    match cli.command {
        Command::Semicircle => commands::semicircle(&cfg, cli.seed),
        Command::Convolve => commands::convolve(&cfg, cli.seed),
        Command::Clt => commands::clt(&cfg, cli.seed),
        Command::Bai => commands::bai(&cfg, cli.seed),
        Command::GueSelfnorm => commands::gue_selfnorm(&cfg, cli.seed),
        Command::Ineq => commands::ineq(&cfg, cli.seed),
        Command::RateFit => commands::ratefit(&cfg, cli.seed),
        Command::Atoms => commands::atoms(&cfg, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, output) {
                    eprintln!("i/o error: cannot write {path:?}: {e}");
                    return ExitCode::from(4);
                }
            } else {
                print!("{output}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
