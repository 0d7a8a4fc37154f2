//! `rsc`: cluster multi-epoch time series channels by spectral-density
//! similarity, from the command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation failure, 3 numerical
//! failure.

mod commands;
mod config;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use rsc_core::cluster::Measure;
use rsc_core::eval::BenchmarkDesign;
use rsc_core::simulate::{ContaminationSpec, EyeblinkParams, MixtureDesign};
use rsc_core::{Error, Result};

use config::{
    BenchmarkCliConfig, ClusterConfig, ElbowConfig, EstimateConfig, SimulateConfig, WindowsConfig,
};

#[derive(Parser)]
#[command(
    name = "rsc",
    version,
    about = "Robust spectral-density clustering of multi-epoch time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file for the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the seed in a benchmark config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; created if absent.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset and write it as per-channel CSVs plus truth labels.
    Simulate(Common),
    /// Estimate smoothed bias-corrected log-periodograms for a dataset.
    Estimate(Common),
    /// Cluster the channels at a fixed cluster count.
    Cluster(Common),
    /// Trace the agglomeration and suggest a cluster count.
    Elbow(Common),
    /// Replicated simulate-contaminate-cluster-score benchmark.
    Benchmark(Common),
    /// Moving-window clustering stability over a long recording.
    Windows(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Simulate(c)
            | Command::Estimate(c)
            | Command::Cluster(c)
            | Command::Elbow(c)
            | Command::Benchmark(c)
            | Command::Windows(c) => c,
        }
    }
}

fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn required_config<T: DeserializeOwned>(path: Option<&PathBuf>, command: &str) -> Result<T> {
    let path = path.ok_or_else(|| {
        Error::InvalidInput(format!("the {command} command requires --config <json>"))
    })?;
    load_config(path)
}

/// The benchmark run with no config: the five-band design under all three
/// contaminations, all three methods, 20 replicates.
fn default_benchmark(seed: u64) -> BenchmarkCliConfig {
    BenchmarkCliConfig {
        design: BenchmarkDesign::Mixture(MixtureDesign::default()),
        t_freqs: 50,
        smoothing: Default::default(),
        contaminations: vec![
            ContaminationSpec::None,
            ContaminationSpec::Shift { delta: 0.2, magnitude: 4.0 },
            ContaminationSpec::Eyeblink { delta: 0.3, params: EyeblinkParams::default() },
        ],
        methods: vec![Measure::Fm, Measure::Cr, Measure::Mean],
        k_target: 5,
        replicates: 20,
        seed,
    }
}

fn run(cli: &Cli) -> Result<()> {
    let common = cli.command.common();
    let threads = match common.threads {
        Some(n) => Some(n),
        None => match std::env::var("RSC_THREADS") {
            Ok(value) => Some(value.parse().map_err(|_| {
                Error::InvalidInput(format!("RSC_THREADS must be an integer, got {value:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::InvalidInput("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    }
    let seed = common.seed.unwrap_or(0);
    match &cli.command {
        Command::Simulate(c) => {
            let config: SimulateConfig = match &c.config {
                Some(path) => load_config(path)?,
                None => SimulateConfig::default(),
            };
            commands::cmd_simulate(&config, seed, &c.out)
        }
        Command::Estimate(c) => {
            let config: EstimateConfig = required_config(c.config.as_ref(), "estimate")?;
            commands::cmd_estimate(&config, &c.out)
        }
        Command::Cluster(c) => {
            let config: ClusterConfig = required_config(c.config.as_ref(), "cluster")?;
            commands::cmd_cluster(&config, &c.out)
        }
        Command::Elbow(c) => {
            let config: ElbowConfig = required_config(c.config.as_ref(), "elbow")?;
            commands::cmd_elbow(&config, &c.out)
        }
        Command::Benchmark(c) => {
            let mut config: BenchmarkCliConfig = match &c.config {
                Some(path) => load_config(path)?,
                None => default_benchmark(seed),
            };
            if let Some(seed) = common.seed {
                config.seed = seed;
            }
            commands::cmd_benchmark(&config, &c.out)
        }
        Command::Windows(c) => {
            let config: WindowsConfig = required_config(c.config.as_ref(), "windows")?;
            commands::cmd_windows(&config, seed, &c.out)
        }
    }
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Io(_) | Error::Csv(_) => 1,
        Error::Numerical(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code(&error))
        }
    }
}
