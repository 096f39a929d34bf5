//! Command-line front end: each subcommand reads a plain-text config and
//! emits deterministic CSV/JSON data files.

mod commands;
mod config;

use anyhow::Result;
use clap::{Parser, Subcommand};
use config::Config;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "donorspin",
    about = "Coupled nuclear-electronic spin simulator: spectra, pulses, gates, decoherence",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy levels E(B) for all labelled states, with crossing report
    Levels(CommonArgs),
    /// Field-swept CW spectrum at a fixed microwave frequency
    Spectrum(CommonArgs),
    /// Cancellation resonances, df/dB working points, line positions
    Resonances(CommonArgs),
    /// Time-domain pulse propagation (populations per level)
    Rabi(CommonArgs),
    /// Master-equation runs and T1/T2 sweeps for magnetic-field noise
    Lindblad(CommonArgs),
    /// Exact verification of the gate-sequence identities
    Gates(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Scenario configuration file
    #[arg(long, short)]
    config: PathBuf,
    /// Directory for output files (created if missing)
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn run(args: &CommonArgs, f: impl Fn(&Config, &std::path::Path) -> Result<()>) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir)?;
    let cfg = Config::load(&args.config)?;
    f(&cfg, &args.out_dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Levels(a) => run(a, commands::cmd_levels),
        Command::Spectrum(a) => run(a, commands::cmd_spectrum),
        Command::Resonances(a) => run(a, commands::cmd_resonances),
        Command::Rabi(a) => run(a, commands::cmd_rabi),
        Command::Lindblad(a) => run(a, commands::cmd_lindblad),
        Command::Gates(a) => run(a, commands::cmd_gates),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
