use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod bench;
mod compare;
mod config;
mod error;
mod evolve;
mod select;

/// Lexicase-family parent selection and its diagnostics.
#[derive(Debug, Parser)]
#[command(name = "dalex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Select parents from an error matrix.
    Select(select::SelectArgs),
    /// Compare methods' selection distributions with a reference method.
    Compare(compare::CompareArgs),
    /// Time batched selection events on generated matrices (CSV).
    Bench(bench::BenchArgs),
    /// Run evolution on a synthetic problem.
    Evolve(evolve::EvolveArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Select(a) => select::run(a, &mut out),
        Command::Compare(a) => compare::run(a, &mut out),
        Command::Bench(a) => bench::run(a, &mut out),
        Command::Evolve(a) => evolve::run(a),
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
