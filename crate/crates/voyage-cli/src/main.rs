//! `voyage` — fuel/time-optimal ocean routing from the command line.
//!
//! Exit codes: 0 on success, 1 when the scenario is infeasible or the
//! destination unreachable, 2 on usage or configuration errors.

mod commands;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration (exit 2).
    Usage(String),
    /// Valid inputs, unreachable/infeasible scenario (exit 1).
    Infeasible(String),
    /// IO or environment failure (exit 1).
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario config (TOML); defaults to the built-in scenario.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override the mesh RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the number of Latin-hypercube mesh points.
    #[arg(long, value_name = "N")]
    pub mesh_size: Option<usize>,
    /// Override the horizon length in steps.
    #[arg(long, value_name = "N")]
    pub horizon: Option<usize>,
}

fn parse_lambda(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("lambda {v} outside [0, 1]"))
    }
}

fn parse_lambda_step(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("lambda step {v} outside (0, 1]"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "voyage",
    version,
    about = "Fuel/time-optimal vessel routing in ocean currents with refueling stops",
    after_help = "Set VOYAGE_CACHE_DIR to cache mesh samples and solved value tables between runs."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one weight and write the optimal trajectory (CSV + SVG + summary).
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Scalarization weight in [0, 1]: 0 = pure fuel, 1 = pure time.
        #[arg(long, value_parser = parse_lambda)]
        lambda: f64,
        /// Initial fuel in gallons (default: the config's start fuel).
        #[arg(long)]
        fuel: Option<f64>,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Sweep the weight grid and write Pareto fronts (CSV + SVG).
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Weight grid spacing over [0, 1].
        #[arg(long, default_value = "0.05", value_parser = parse_lambda_step)]
        lambda_step: f64,
        /// Initial fuel levels in gallons, comma separated.
        #[arg(long, value_delimiter = ',', value_name = "F[,F...]")]
        fuel: Option<Vec<f64>>,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Render the environment map: current field, ports, start, terminal.
    Map {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve {
            common,
            lambda,
            fuel,
            out,
        } => commands::run_solve(common, *lambda, *fuel, out),
        Command::Sweep {
            common,
            lambda_step,
            fuel,
            out,
        } => commands::run_sweep(common, *lambda_step, fuel.clone(), out),
        Command::Map { common, out } => commands::run_map(common, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
