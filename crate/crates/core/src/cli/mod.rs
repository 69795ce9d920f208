//! The `faircluster` command line.

pub mod config;
pub mod experiment;
pub mod ingest;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use log::error;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, ExperimentOutcome, RunMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "faircluster",
    version,
    about = "Fair and lower-bounded clustering experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the fair pipeline over every (k, δ) cell of a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
        /// Replaces the manifest seed.
        #[arg(long)]
        seed: Option<u64>,
        /// `dotted.key=value`, repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the fair pipeline with the brute-force oracles on.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Lower-bounded clustering for every k of a manifest.
    Lb {
        #[arg(long)]
        config: PathBuf,
        /// Minimum cluster size.
        #[arg(long = "L", value_name = "L")]
        lower: usize,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Executes a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let (config_path, mut overrides, jobs, mode) = match cli.command {
        Command::Run {
            config,
            jobs,
            seed,
            mut overrides,
        } => {
            if let Some(seed) = seed {
                overrides.push(format!("seed={seed}"));
            }
            (config, overrides, jobs, RunMode::Fair)
        }
        Command::Oracle { config, overrides } => (config, overrides, Some(1), RunMode::Oracle),
        Command::Lb {
            config,
            lower,
            jobs,
            overrides,
        } => (config, overrides, jobs, RunMode::LowerBounded(lower)),
    };
    if let RunMode::LowerBounded(l) = mode {
        if l == 0 {
            error!("--L must be positive");
            return EXIT_FATAL;
        }
        overrides.push(format!("flags.lb_mode={l}"));
    }
    let jobs = jobs.unwrap_or_else(default_jobs).max(1);
    let config = match ExperimentConfig::load(&config_path, &overrides) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            return EXIT_FATAL;
        }
    };
    match run_experiment(&config, jobs, mode) {
        Ok(outcome) => {
            for cell in &outcome.report.cells {
                match (&cell.metrics, &cell.error) {
                    (Some(m), _) => println!(
                        "k={} delta={} vanilla={:.6} fair={:.6} ratio={:.4} lambda={} bound={} min_balance={:.4}",
                        cell.k,
                        cell.label,
                        m.vanilla_cost,
                        m.fair_cost,
                        m.cost_of_fairness,
                        m.lambda_max,
                        m.violation_bound,
                        m.min_balance
                    ),
                    (None, err) => println!("k={} delta={} FAILED: {}", cell.k, cell.label, err.as_deref().unwrap_or("")),
                }
            }
            for cell in &outcome.report.lb_cells {
                match (&cell.metrics, &cell.error) {
                    (Some(m), _) => println!(
                        "k={} L={} lb_cost={:.6} vanilla={:.6} ratio={:.4} min_size={}",
                        cell.k,
                        cell.lower,
                        m.lb_cost,
                        m.vanilla_cost,
                        m.cost_ratio,
                        m.min_cluster_size
                    ),
                    (None, err) => println!(
                        "k={} L={} FAILED: {}",
                        cell.k,
                        cell.lower,
                        err.as_deref().unwrap_or("")
                    ),
                }
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.failed_cells() > 0 {
                EXIT_PARTIAL
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            error!("{e}");
            EXIT_FATAL
        }
    }
}
