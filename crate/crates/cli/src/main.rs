//! `dpxa`: generate synthetic series, run DFA/DCCA/DPXA analyses and the
//! validation experiments.

mod analyze;
mod experiment;
mod gen;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dpxa_core::ErrorCategory;

#[derive(Debug, Parser)]
#[command(
    name = "dpxa",
    version,
    about = "Detrended partial cross-correlation analysis"
)]
struct Cli {
    /// Worker threads (defaults to the number of available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Log verbosity; repeat for more detail.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write synthetic series to CSV with a JSON sidecar.
    Gen(gen::GenArgs),
    /// Fluctuation analysis of columns of a CSV file.
    Analyze(analyze::AnalyzeArgs),
    /// Run a validation experiment and compare with the expected values.
    Experiment(experiment::ExperimentArgs),
}

/// Failures the binary reports, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Core(dpxa_core::Error),
    /// Experiment finished but some checks failed under `--strict`.
    ChecksFailed(usize),
}

impl From<dpxa_core::Error> for CliError {
    fn from(e: dpxa_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A usage error attributed to one flag, formatted like clap's own.
pub fn usage_error(flag: &str, reason: impl std::fmt::Display) -> CliError {
    use clap::CommandFactory;
    CliError::Usage(Cli::command().error(
        clap::error::ErrorKind::ValueValidation,
        format!("invalid value for '{flag}': {reason}"),
    ))
}

pub const EXIT_CHECKS_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INGESTION: u8 = 3;
pub const EXIT_CONFIG: u8 = 4;
pub const EXIT_NUMERICAL: u8 = 5;
pub const EXIT_IO: u8 = 6;

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Usage(_) => EXIT_USAGE,
        CliError::ChecksFailed(_) => EXIT_CHECKS_FAILED,
        CliError::Core(e) => match e.category() {
            ErrorCategory::Ingestion => EXIT_INGESTION,
            ErrorCategory::Config => EXIT_CONFIG,
            ErrorCategory::Numerical => EXIT_NUMERICAL,
            ErrorCategory::Io => EXIT_IO,
        },
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(usage_error("--jobs", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| usage_error("--jobs", e))?;
    }
    match cli.command {
        Command::Gen(args) => gen::run(args),
        Command::Analyze(args) => analyze::run(args),
        Command::Experiment(args) => experiment::run(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            match e {
                CliError::Usage(err) => {
                    let _ = err.print();
                }
                CliError::Core(err) => eprintln!("error: {err}"),
                CliError::ChecksFailed(n) => eprintln!("error: {n} check(s) failed"),
            }
            ExitCode::from(code)
        }
    }
}
