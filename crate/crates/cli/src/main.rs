//! `distimator` command-line front end.

mod compare;
mod config;
mod error;
mod estimate;
mod output;
mod simulate;
mod sweep;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "distimator",
    version,
    about = "Estimate Bell-diagonal states from entanglement distillation statistics",
    after_help = "Exit codes: 0 success, 2 usage, configuration or input error, 3 I/O error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Simulate(simulate::SimulateArgs),
    Estimate(estimate::EstimateArgs),
    SweepWerner(sweep::SweepWernerArgs),
    SweepBell(sweep::SweepBellArgs),
    CompareTomography(compare::CompareArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Estimate(args) => estimate::run(args),
        Command::SweepWerner(args) => sweep::run_werner(args),
        Command::SweepBell(args) => sweep::run_bell(args),
        Command::CompareTomography(args) => compare::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
