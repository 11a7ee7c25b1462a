use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use kplab::config::{parse_config, ExperimentKind};
use kplab::runner::run_experiment;

/// Batch experiment runner for the KP-II control laboratory.
#[derive(Parser, Debug)]
#[command(name = "kplab", version, about)]
struct Cli {
    /// Experiment to run; must match the configuration file.
    experiment: ExperimentKind,

    /// Path to the JSON configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides KPLAB_OUTPUT and the config field).
    #[arg(long)]
    output: Option<PathBuf>,

    /// Seed override for randomized inputs.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker thread count for parallel sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if cfg.experiment != cli.experiment {
        eprintln!(
            "error: command line asks for '{}' but the config declares '{}'",
            cli.experiment, cfg.experiment
        );
        return ExitCode::from(1);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    match run_experiment(&cfg, cli.output.as_deref(), cli.threads) {
        Ok(outcome) => {
            println!(
                "{}: ok, outputs in {}",
                cfg.experiment,
                outcome.output_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
