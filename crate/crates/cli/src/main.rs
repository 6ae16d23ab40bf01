//! `momdens` — decide from finitely many moments whether a measure on a
//! compact semi-algebraic set can have a density.
//!
//! Exit codes: 0 all checks passed / all levels feasible, 2 usage or input
//! validation error, 3 infeasibility (non-existence) detected, 4 the run
//! ended indeterminate.

mod detect;
mod dump;
mod hausdorff_cmd;
mod manifest;
mod scenario;
mod table;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "momdens", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate moment sequences for reference scenarios.
    Scenario(scenario::ScenarioArgs),
    /// Run the detection hierarchy on a set and a moment sequence.
    Detect(detect::DetectArgs),
    /// Reproduce the single- or two-atom detection-threshold tables.
    Table(table::TableArgs),
    /// Classical finite-difference checks for a univariate sequence.
    Hausdorff(hausdorff_cmd::HausdorffArgs),
    /// Emit one assembled level in the conic text exchange format.
    DumpProblem(dump::DumpArgs),
}

pub(crate) const EXIT_OK: u8 = 0;
pub(crate) const EXIT_USAGE: u8 = 2;
pub(crate) const EXIT_DETECTED: u8 = 3;
pub(crate) const EXIT_INDETERMINATE: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scenario(args) => scenario::run(args),
        Command::Detect(args) => detect::run(args),
        Command::Table(args) => table::run(args),
        Command::Hausdorff(args) => hausdorff_cmd::run(args),
        Command::DumpProblem(args) => dump::run(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
