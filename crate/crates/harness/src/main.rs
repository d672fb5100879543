use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use harness_cli::{run, Config, Experiment};

/// Runs one estimator experiment and writes `<experiment>.csv` plus a manifest.
#[derive(Debug, Parser)]
#[command(name = "scr-mlmc", version)]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli
        .config
        .as_deref()
        .map_or_else(|| Ok(Config::default()), Config::load)
        .and_then(|mut cfg| {
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(out) = cli.out {
                cfg.out = out;
            }
            run(cli.experiment, &cfg)
        });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("scr-mlmc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
