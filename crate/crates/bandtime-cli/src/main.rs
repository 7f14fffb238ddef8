//! bandtime: quantized arrival-time distributions for 1D scattering.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "bandtime",
    version,
    about = "Quantized arrival-time distributions and tunneling time scales for 1D scattering"
)]
struct Cli {
    /// Configuration file with dotted keys, e.g. `potential.u = 0.3`
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. --set potential.u=0.65
    #[arg(long, global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory (overrides output.directory)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Band-resolved transmission amplitude, phase and time-scale curves
    Scatter,
    /// Position densities of the unprojected and projected arrival states
    States,
    /// Quantized arrival-time distribution and its summary
    Arrival,
    /// Arrival analyses across barrier heights
    Sweep {
        /// Barrier heights to sweep (defaults to 0.1 0.3 0.53 0.55 0.65)
        #[arg(long = "u", value_name = "U")]
        u_values: Vec<f64>,
    },
    /// Run the oracle + invariant verification suite
    Verify,
}

fn run(cli: &Cli) -> bandtime::Result<()> {
    let config = RunConfig::load(cli.config.as_deref(), &cli.set, cli.out.as_deref())?;
    match &cli.command {
        Command::Scatter => commands::cmd_scatter(&config),
        Command::States => commands::cmd_states(&config),
        Command::Arrival => commands::cmd_arrival(&config),
        Command::Sweep { u_values } => commands::cmd_sweep(&config, u_values),
        Command::Verify => commands::cmd_verify(&config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
