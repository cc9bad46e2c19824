//! `pinch`: solve, sweep and Monte Carlo checks for the pinching-antenna
//! power-minimization pipeline.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pinch_core::Scheme;

#[derive(Debug, Parser)]
#[command(name = "pinch", version, about = "Robust power minimization for a pinching-antenna downlink")]
struct Cli {
    /// Print progress to standard error.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Place the antenna for one seeded population and print the allocation as JSON.
    Solve(SolveArgs),
    /// Run a parameter sweep and write the per-scheme mean powers as CSV.
    Sweep(SweepArgs),
    /// Estimate one user's outage probability at a given power by simulation.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario JSON document.
    #[arg(long)]
    config: PathBuf,

    /// Override the master seed of the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,

    #[arg(long, default_value = "pso", value_parser = parse_scheme)]
    scheme: Scheme,

    /// Write the JSON here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,

    /// Swept variable: target_rate, uncertainty_radius or outage_cap.
    #[arg(long)]
    sweep: String,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,

    /// Comma-separated schemes (default: all).
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme)]
    schemes: Option<Vec<Scheme>>,

    /// Comma-separated swept values (default grid per variable).
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,

    /// Realizations per value (overrides the config).
    #[arg(long)]
    realizations: Option<usize>,

    /// Also write the fixed/pso and pso/grid ratio table here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,

    #[arg(long = "x-pin")]
    x_pin: f64,

    #[arg(long = "user-index")]
    user_index: usize,

    /// Transmit power in W (default: the solved minimum power at `--x-pin`).
    #[arg(long)]
    power: Option<f64>,

    /// Number of sampled true locations.
    #[arg(short = 'n', default_value_t = pinch_core::oracle::OUTAGE_SAMPLES)]
    samples: u64,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: pinch_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pinch: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
