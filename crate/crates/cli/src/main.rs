//! `intermit` — a numerical laboratory for moment growth of parabolic
//! stochastic PDEs `∂ₜu = 𝓛u + σ(u)ẇ` driven by space-time white noise.
//!
//! Subcommands:
//! * `bounds`   — evaluate every analytic growth bound for the configured model
//! * `classify` — recurrence / local-times / threshold classification of the generator
//! * `renewal`  — deterministic second-moment solve (linear σ, constant data)
//! * `simulate` — Monte Carlo ensemble with moment curves and diagnostics
//!
//! One TOML config file drives everything; `--set key=value` overrides
//! individual entries, and all randomness flows from a single seed.
//!
//! Exit codes: 0 success, 2 configuration error, 3 model/domain error,
//! 4 numerical-accuracy error, 5 simulation blow-up.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use intermit_core::error::CoreError;

#[derive(Parser)]
#[command(name = "intermit", version, about = "Moment-growth laboratory for parabolic SPDEs")]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a config entry (dotted path), e.g. --set sigma.lambda=2.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Output directory (overrides [output].dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Master seed (overrides the config `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic intermittency bounds for the configured model.
    Bounds,
    /// Monte Carlo ensemble simulation.
    Simulate,
    /// Deterministic second-moment renewal solve.
    Renewal,
    /// Generator classification: recurrence, local times, thresholds.
    Classify,
}

fn run(cli: &Cli) -> Result<(), CoreError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CoreError::config(format!("thread pool: {e}")))?;
    }
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CoreError::config("--config PATH is required".to_string()))?;
    let cfg = RunConfig::load(config_path, &cli.sets)?;

    let seed = cli.seed.or(cfg.seed).unwrap_or_else(|| {
        let s: u64 = rand::random();
        eprintln!("seed not configured; generated seed = {s}");
        s
    });
    println!("seed = {seed}");

    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));

    match cli.command {
        Command::Bounds => commands::cmd_bounds(&cfg, &out_dir),
        Command::Simulate => commands::cmd_simulate(&cfg, &out_dir, seed),
        Command::Renewal => commands::cmd_renewal(&cfg, &out_dir),
        Command::Classify => commands::cmd_classify(&cfg, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
