//! `banditsim`: experiment runner, policy comparison, report emission, and
//! feature-engineering utilities for the contextual-bandit toolkit.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
//! The environment variable `BANDITSIM_THREADS` caps parallelism.

mod compare;
mod features;
mod manifest;
mod report;
mod run;

use banditsim_core::Error;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "banditsim", version, about = "Contextual-bandit experiment toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a config file
    Run(run::RunArgs),
    /// Run several policies under matched seeds and compare them
    Compare(compare::CompareArgs),
    /// Turn a results table into plot-ready curve and box-plot CSVs
    Report(report::ReportArgs),
    /// Feature engineering on flat binary matrices
    #[command(subcommand)]
    Features(features::FeaturesCmd),
}

fn main() {
    std::process::exit(run_cli());
}

fn run_cli() -> i32 {
    if let Err(message) = init_thread_pool() {
        eprintln!("error: {message}");
        return 2;
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run::execute(args),
        Command::Compare(args) => compare::execute(args),
        Command::Report(args) => report::execute(args),
        Command::Features(cmd) => features::execute(cmd),
    };
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

/// 2 for anything the user can fix in their invocation or inputs, 1 for
/// failures at runtime.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Schema(_) | Error::Parse(_) => 2,
        _ => 1,
    }
}

fn init_thread_pool() -> Result<(), String> {
    let raw = match std::env::var("BANDITSIM_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(format!("BANDITSIM_THREADS: {e}")),
        Ok(raw) => raw,
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| format!("BANDITSIM_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("cannot build the thread pool: {e}"))
}
