mod config;
mod manifest;
mod solve;
mod tools;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::FileConfig;

/// Unit commitment with coal deep-cycling costs and dynamic CO2 emissions.
#[derive(Parser)]
#[command(name = "deepcycle", version)]
struct Cli {
    /// TOML file supplying default values for any flag.
    #[arg(long, global = true, env = "DEEPCYCLE_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the UC problem for every ramp-cost level and wind setting.
    Solve(solve::SolveArgs),
    /// Fit static and dynamic emission models to hourly samples.
    Fit(tools::FitArgs),
    /// Generate synthetic emission samples.
    Synth(tools::SynthArgs),
    /// Write the UC problems as MPS files without solving them.
    Export(solve::SolveArgs),
    /// Check a case file and, optionally, a solution file against it.
    Validate(tools::ValidateArgs),
    /// Solve an MPS file and write a solution file (external-solver shim).
    #[command(hide = true)]
    SolveMps(tools::SolveMpsArgs),
}

fn run(cli: Cli) -> Result<bool> {
    let (file, text) = match &cli.config {
        Some(path) => {
            let (f, t) = FileConfig::load(path)?;
            (f, Some(t))
        }
        None => (FileConfig::default(), None),
    };
    let config = cli.config.as_deref().zip(text.as_deref());
    match &cli.command {
        Command::Solve(a) => solve::run(a, &file, config),
        Command::Fit(a) => tools::fit(a, &file, config),
        Command::Synth(a) => tools::synth(a, &file, config),
        Command::Export(a) => tools::export(a, &file),
        Command::Validate(a) => tools::validate(a, &file),
        Command::SolveMps(a) => tools::solve_mps(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
