//! `ym`: build, check and probe homogeneous Young measures of piecewise
//! functions described in JSON documents.
//!
//! Exit codes: 0 success, 1 a check failed, 2 the input function is
//! invalid, 3 I/O error, 4 unreadable input, bad usage or nothing to do.

mod compute;
mod converge;
mod failure;
mod generate;
mod io;
mod scenario;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "ym", version, about = "Homogeneous Young measures of piecewise functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build every applicable presentation of the measure and write a report.
    Compute(compute::ComputeArgs),
    /// Check the integral identity, cross-presentation agreement and a Monte Carlo sample.
    Verify(verify::VerifyArgs),
    /// Probe a sequence for weak convergence on densities and on measures.
    Converge(converge::ConvergeArgs),
    /// Check that set values of a sequence of monotone pieces increase and settle.
    ScenarioMonotone(scenario::ScenarioArgs),
    /// Write example documents.
    Generate(generate::GenerateArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(4);
        }
    };
    let result: Result<(), Failure> = match &cli.command {
        Command::Compute(args) => compute::run(args),
        Command::Verify(args) => verify::run(args),
        Command::Converge(args) => converge::run(args),
        Command::ScenarioMonotone(args) => scenario::run(args),
        Command::Generate(args) => generate::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("ym: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
