//! Command-line front end: parameter sweeps, Monte-Carlo runs, and mode
//! diagnostics with machine-readable CSV/JSON output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use soliton_metrology::config::RunConfig;
use soliton_metrology::sweep::{
    cmd_fisher_density_sweep, cmd_fisher_pixel_sweep, cmd_modes, cmd_simulate, Table,
};
use soliton_metrology::Error;

#[derive(Parser)]
#[command(
    name = "soliton-metrology",
    version,
    about = "Quantum-limited position estimation for a dark matter-wave soliton",
    long_about = "Computes Fisher information / Cramer-Rao bounds for locating a dark \
                  soliton from pixelated atom-count images, under Poisson, Gaussian and \
                  full quantum (Bogoliubov) measurement models, and verifies the bounds \
                  by Monte-Carlo simulation.\n\nConfiguration is a flat 'key = value' \
                  file (every key optional); command-line flags override it."
)]
struct Cli {
    /// Path to a flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format (overrides the config file).
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Random seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; 0 means one per logical CPU (overrides the config file).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Enable slow brute-force validation columns (overrides the config file).
    #[arg(long, global = true)]
    oracle: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fisher information vs pixel size at fixed density.
    FisherPixelSweep,
    /// Fisher information vs density at fixed pixel size.
    FisherDensitySweep,
    /// Monte-Carlo estimator benchmark against the Cramer-Rao bound.
    Simulate,
    /// Dump the excitation mode table (k, energy, normalization residual).
    Modes,
}

fn effective_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(f) = &cli.format {
        cfg.format = f.parse()?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if cli.oracle {
        cfg.oracle = true;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = effective_config(cli)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let table: Table = match cli.command {
        Command::FisherPixelSweep => cmd_fisher_pixel_sweep(&cfg)?,
        Command::FisherDensitySweep => cmd_fisher_density_sweep(&cfg)?,
        Command::Simulate => cmd_simulate(&cfg)?,
        Command::Modes => cmd_modes(&cfg)?,
    };
    let rendered = table.render(cfg.format);
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_) | Error::Domain(_) => 2,
                Error::ModelValidity(_) | Error::DegenerateModel(_) => 3,
                Error::NumericalPrecision(_) => 4,
                Error::Io(_) => 1,
            };
            ExitCode::from(code)
        }
    }
}
