use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};

use sysid_cli::commands::{cmd_infer, cmd_report, cmd_simulate, cmd_sweep, resolve_out_dir};
use sysid_cli::config::{Method, RunConfig};
use sysid_cli::CliError;

/// Frequency-domain identification of dynamic load parameters from ambient
/// fluctuation records.
#[derive(Parser)]
#[command(name = "sysid", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize a seeded measurement set (clean and noisy records plus
    /// metadata).
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Fit the model to an existing measurement set and write the posterior
    /// summary, optimizer trace, and PSD table.
    Infer {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Overrides the config's optimizer choice.
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Monte Carlo accuracy sweep over SNR, scenarios, and methods.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Render before/after PSD charts from a psd.csv produced by infer.
    Report {
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn load_config(path: &PathBuf, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Simulate { config, seed, out_dir } => {
            let cfg = load_config(&config, seed)?;
            let dir = resolve_out_dir(out_dir.as_deref(), Some(&cfg));
            cmd_simulate(&cfg, &dir)
        }
        Cmd::Infer { config, seed, out_dir, method } => {
            let mut cfg = load_config(&config, seed)?;
            if let Some(m) = method {
                cfg.method = m;
            }
            let dir = resolve_out_dir(out_dir.as_deref(), Some(&cfg));
            cmd_infer(&cfg, &dir)
        }
        Cmd::Sweep { config, seed, out_dir } => {
            let cfg = load_config(&config, seed)?;
            let dir = resolve_out_dir(out_dir.as_deref(), Some(&cfg));
            cmd_sweep(&cfg, &dir)
        }
        Cmd::Report { out_dir } => {
            let dir = resolve_out_dir(out_dir.as_deref(), None);
            cmd_report(&dir)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        process::exit(e.exit_code());
    }
}
