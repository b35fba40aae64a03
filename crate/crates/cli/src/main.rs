//! `cpo-sim`: transmission sweeps, noise spectra, oracle checks and fits
//! for pump/probe propagation through a coherent-population-oscillation
//! medium.
//!
//! Exit codes: 0 success, 1 usage or domain error, 2 oracle tolerance
//! exceeded.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Context, Status};
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "cpo-sim", version, about)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, env = "CPO_SIM_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// RNG seed for stochastic runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest acceptable oracle `rel_error`.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probe transmission for both pump/probe phases over a log power grid.
    TransmissionSweep(commands::sweep::SweepArgs),
    /// Closed-form quadrature spectra versus pump depth.
    NoiseEvolution(commands::noise::NoiseArgs),
    /// Compare closed-form spectra with the Langevin oracle.
    Oracle(commands::oracle::OracleArgs),
    /// Fit the transmission model to measured data.
    Fit(commands::fit::FitArgs),
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let ctx = Context {
        config,
        config_path: cli.config,
        out: cli.out,
        seed: cli.seed,
        tolerance: cli.tolerance,
    };
    match &cli.command {
        Command::TransmissionSweep(a) => commands::sweep::run(a, &ctx),
        Command::NoiseEvolution(a) => commands::noise::run(a, &ctx),
        Command::Oracle(a) => commands::oracle::run(a, &ctx),
        Command::Fit(a) => commands::fit::run(a, &ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::ToleranceExceeded) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
