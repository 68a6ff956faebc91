//! Scenario-driven front end behind the `netlock` binary.
//!
//! Every command reads a [`ScenarioConfig`], applies the global overrides and
//! writes plain CSV/JSON into the output directory. Exit codes: 0 on success
//! (converged / identified), 1 on configuration or I/O errors, 2 on numerical
//! failure, a solve that did not converge, or an unidentified λ.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::{
    cmd_calibrate, cmd_generate_network, cmd_optimize, cmd_report_centrality, cmd_simulate,
    cmd_sweep, parse_centrality_csv, parse_sweep_csv, sweep_scenarios, CentralityRow, Context,
    NetworkStats, Outcome, Scenario, SimulationSummary, SweepRow, CENTRALITY_HEADER, SWEEP_HEADER,
    ZERO_VARIANCE,
};
pub use config::{
    CalibrationSpec, EconomySpec, EpidemicSpec, InitialSpec, NetworkSpec, OutputSpec, PlannerSpec,
    ScenarioConfig, SimulateSpec, StateInputs, SweepSpec, Topology, SCHEMA_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "netlock",
    version,
    about = "Optimal lockdown of SIRD epidemics on contact networks"
)]
pub struct Cli {
    /// Scenario TOML file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `outputs.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Network generator seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps and calibration.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Time step in days.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Horizon in days.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the configured network as an edge list plus summary statistics.
    GenerateNetwork,
    /// Integrate the epidemic under a fixed policy.
    Simulate,
    /// Solve the planner's problem at one λ.
    Optimize,
    /// Solve a list of scenarios (λ values, densities or topologies).
    Sweep,
    /// Correlate a solved policy's time-averaged lockdown with centrality.
    ReportCentrality {
        /// Directory holding `policy.csv` (defaults to the output directory).
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Estimate λ from an observed death series.
    Calibrate {
        /// `day,deaths` CSV (overrides `calibration.target`).
        #[arg(long)]
        target: Option<PathBuf>,
    },
}

/// Loads the config, applies the overrides and runs the command.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let ctx = Context::from_cli(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    pool.install(|| match &cli.command {
        Command::GenerateNetwork => cmd_generate_network(&ctx),
        Command::Simulate => cmd_simulate(&ctx),
        Command::Optimize => cmd_optimize(&ctx),
        Command::Sweep => cmd_sweep(&ctx),
        Command::ReportCentrality { solution } => cmd_report_centrality(&ctx, solution.as_deref()),
        Command::Calibrate { target } => cmd_calibrate(&ctx, target.as_deref()),
    })
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            for line in &outcome.messages {
                println!("{line}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
