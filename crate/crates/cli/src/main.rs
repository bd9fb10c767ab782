#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod expand;
mod ingest;
mod oracle;
mod output;
mod select;
mod simstudy;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};

/// Bayesian model selection with approximate Laplace approximations.
///
/// The worker thread count is read from the ALA_THREADS environment variable.
#[derive(Parser)]
#[command(name = "ala", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score models and write posterior model and inclusion probabilities.
    Select(select::SelectArgs),
    /// Expand categorical and spline columns into grouped design columns.
    Expand(expand::ExpandArgs),
    /// Run a replicated simulation study.
    Simstudy(simstudy::SimstudyArgs),
    /// Quadrature and Monte Carlo reference values for one model.
    Oracle(oracle::OracleArgs),
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("ALA_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("ALA_THREADS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Select(a) => select::run(a),
        Command::Expand(a) => expand::run(a),
        Command::Simstudy(a) => simstudy::run(a),
        Command::Oracle(a) => oracle::run(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
