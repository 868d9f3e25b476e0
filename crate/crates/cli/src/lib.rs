//! Experiment runner for Voronoi percolation: estimates, sweeps, RSW
//! diagnostics, invariant checks and plots.
//!
//! Every command writes CSV to standard output, optionally appends it to
//! `--csv`, and optionally appends a JSONL record with the resolved
//! configuration, seed and version to `--log`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::commands::Output;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::plot::PlotSpec;
use crate::verify::{Level, Mutation};

#[derive(Debug, Parser)]
#[command(name = "voronoi-rsw", version, about = "Monte Carlo experiments on planar Voronoi percolation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON file with RunConfig fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: RunConfig,
}

impl RunArgs {
    /// Defaults, then the config file, then flags, then the thread
    /// environment variable if threads are still unset.
    pub fn resolve(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        base.overlay(self.overrides.clone()).with_env_threads()
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "fast")]
    pub level: Level,
    #[arg(long, default_value_t = config::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Flip the color of one site before each primary decision, to confirm
    /// that the suites notice.
    #[arg(long)]
    pub flip_one_site: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Input CSV.
    #[arg(long = "in")]
    pub csv_in: PathBuf,
    /// Output SVG.
    #[arg(long = "out")]
    pub svg_out: PathBuf,
    /// Column (or kind-params key) for the horizontal axis.
    #[arg(long)]
    pub x: String,
    /// Column for the vertical axis.
    #[arg(long)]
    pub y: String,
    #[arg(long)]
    pub log_x: bool,
    #[arg(long)]
    pub log_y: bool,
    #[arg(long, default_value = "ci_lo")]
    pub lo: String,
    #[arg(long, default_value = "ci_hi")]
    pub hi: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate one event probability.
    Estimate(RunArgs),
    /// Estimate an event over lists of p, s and rho.
    Sweep(RunArgs),
    /// The balance function phi on a grid of alpha.
    Phi(RunArgs),
    /// The calibrated quantile alpha-hat.
    Alpha(RunArgs),
    /// Good-scale flags with circuit and X-event estimates.
    Scan(RunArgs),
    /// One-arm probabilities and their decay exponent.
    Arm(RunArgs),
    /// Quasi-independence probe.
    Qi(RunArgs),
    /// Run the invariant suites.
    Verify(VerifyArgs),
    /// Plot two CSV columns to SVG.
    Plot(PlotArgs),
}

fn run_estimation(name: &str, args: &RunArgs, f: fn(&RunConfig) -> Result<Output>) -> Result<()> {
    let config = args.resolve()?;
    let out = f(&config)?;
    out.table.emit(&config)?;
    output::write_log(name, &config, &out.results)
}

/// Execute a parsed command.
pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Estimate(a) => run_estimation("estimate", a, commands::cmd_estimate),
        Command::Sweep(a) => run_estimation("sweep", a, commands::cmd_sweep),
        Command::Phi(a) => run_estimation("phi", a, commands::cmd_phi),
        Command::Alpha(a) => run_estimation("alpha", a, commands::cmd_alpha),
        Command::Scan(a) => run_estimation("scan", a, commands::cmd_scan),
        Command::Arm(a) => run_estimation("arm", a, commands::cmd_arm),
        Command::Qi(a) => run_estimation("qi", a, commands::cmd_qi),
        Command::Verify(a) => {
            let threads = RunConfig {
                threads: a.threads,
                ..Default::default()
            }
            .with_env_threads()?
            .threads;
            let m = if a.flip_one_site {
                Mutation::FlipCenterSite
            } else {
                Mutation::None
            };
            let checks = verify::run_verify(a.level, a.seed, threads, m)?;
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} of {} checks passed", checks.len() - failed, checks.len());
            if failed > 0 {
                return Err(CliError::CheckFailed(format!("{failed} verification checks failed")));
            }
            Ok(())
        }
        Command::Plot(a) => {
            let spec = PlotSpec {
                x: a.x.clone(),
                y: a.y.clone(),
                log_x: a.log_x,
                log_y: a.log_y,
                lo: a.lo.clone(),
                hi: a.hi.clone(),
            };
            let n = plot::cmd_plot(&a.csv_in, &a.svg_out, &spec)?;
            println!("{}", json!({ "svg": a.svg_out, "points": n }));
            Ok(())
        }
    }
}
