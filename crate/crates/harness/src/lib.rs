//! Experiment runner: reads a TOML configuration, runs one experiment and
//! writes a CSV table with a JSON manifest next to it.

pub mod config;
pub mod experiments;
pub mod table;

use std::path::PathBuf;

use alm_engine::AlmError;
use market_models::MarketError;
use mlmc_core::EstimatorError;
use thiserror::Error;

pub use config::Config;
pub use experiments::Experiment;
pub use table::Table;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl HarnessError {
    /// Process exit status: 2 for bad input, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(_) | HarnessError::Io(_) => 3,
        }
    }
}

impl From<EstimatorError> for HarnessError {
    fn from(e: EstimatorError) -> Self {
        HarnessError::Numerical(e.to_string())
    }
}

impl From<AlmError> for HarnessError {
    fn from(e: AlmError) -> Self {
        HarnessError::Numerical(e.to_string())
    }
}

impl From<MarketError> for HarnessError {
    fn from(e: MarketError) -> Self {
        HarnessError::Numerical(e.to_string())
    }
}

/// Runs `experiment` and writes its outputs into `cfg.out`.
pub fn run(experiment: Experiment, cfg: &Config) -> Result<Vec<PathBuf>, HarnessError> {
    let table = experiment.run(cfg)?;
    table::write_outputs(&cfg.out, &experiment.name(), cfg, &table)
}
