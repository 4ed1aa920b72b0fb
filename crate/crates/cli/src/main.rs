//! `siqs`: thresholds, simulation and ensembles for the stochastic SIQS model.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be a finite number > 0, got {s}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "siqs", version, about = "Stochastic SIQS epidemic model with white noise and Lévy jumps")]
pub struct Cli {
    /// TOML configuration file; overrides the preset key by key.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Built-in scenario (example1, example2a, example2b, example2a-cond2, table1-deterministic).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Base seed; overrides `run.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Step size in days; overrides `run.dt`.
    #[arg(long, global = true, value_parser = positive)]
    pub dt: Option<f64>,
    /// Horizon in days; overrides `run.t_end`.
    #[arg(long = "t-end", global = true, value_parser = positive)]
    pub t_end: Option<f64>,
    /// Number of ensemble paths; overrides `run.paths`.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub paths: Option<u64>,
    /// Output file (or directory for ensemble and reproduce).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format for files and stdout.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form thresholds and bounds.
    Thresholds {
        /// Largest moment order n in the Γ table and assumption checks.
        #[arg(long, default_value_t = 3)]
        n_max: u32,
    },
    /// One sample path (seed of path 0 of the base seed).
    Simulate,
    /// Parallel Monte Carlo ensemble.
    Ensemble {
        /// Estimate extinction exponents of I.
        #[arg(long)]
        extinction: bool,
        /// Also simulate the dominating auxiliary process.
        #[arg(long)]
        auxiliary: bool,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Print progress to stderr.
        #[arg(long)]
        progress: bool,
    },
    /// Deterministic trajectory by RK4.
    Ode,
    /// Disease-free and endemic equilibria with R0.
    Equilibria,
    /// Integrability and moment assumptions on the jump measure.
    CheckAssumptions {
        #[arg(long, default_value_t = 3)]
        n_max: u32,
    },
    /// Runs every output for a built-in scenario into a directory.
    Reproduce {
        /// Scenario name.
        preset: String,
    },
    /// Prints the effective configuration as TOML.
    DumpConfig,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
