//! Command-line experiments: configuration, dispatch, and CSV/SVG reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use config::Config;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "rankdiff", version, about = "Stationary laws of rank-based interacting diffusions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML experiment configuration; the logistic demo model is used when
    /// omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory for CSV and SVG reports.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Treat any point outside the Laplace domain as an error (exit 3).
    #[arg(long, global = true)]
    pub strict: bool,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the drift against the equilibrium assumption.
    Validate,
    /// Finite-n and limiting Laplace transforms over the n-ladder and grid.
    LaplaceTable,
    /// Convergence of L2n to the product of limits, with a log-log plot.
    ChaoticityScan,
    /// Exact draws from the finite or limiting stationary law.
    Sample,
    /// Euler–Maruyama run of the projected particle system.
    Simulate,
    /// Wasserstein distances between finite-n marginals and the limit.
    WassersteinReport,
    /// Run the built-in oracle suite.
    Selfcheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::LaplaceTable => "laplace-table",
            Command::ChaoticityScan => "chaoticity-scan",
            Command::Sample => "sample",
            Command::Simulate => "simulate",
            Command::WassersteinReport => "wasserstein-report",
            Command::Selfcheck => "selfcheck",
        }
    }
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn run_cli<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
