//! Experiment implementations. Each returns one table; `run` writes it.

mod alm;
mod toy;

use clap::ValueEnum;

use crate::config::Config;
use crate::table::{Cell, Table};
use crate::HarnessError;

pub use alm::{alm_eta, alm_frontier, alm_premia, alm_rmse, alm_select, alm_sensitivity};
pub use toy::{toy_bias, toy_levelvar, toy_lsmc, toy_rmse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Bias of the nested estimator against K on the butterfly problem.
    ToyBias,
    /// Plain and antithetic level variances on the butterfly problem.
    ToyLevelvar,
    /// RMSE of multilevel and nested estimators against cost.
    ToyRmse,
    /// RMSE of the regression estimator against J.
    ToyLsmc,
    /// Forward selection of regressors for an SCR module.
    AlmSelect,
    /// RMSE of antithetic multilevel and regression estimators of an SCR module.
    AlmRmse,
    /// RMSE of the antithetic multilevel estimator for several η.
    AlmEta,
    /// Expected SCR modules against the equity weight.
    AlmFrontier,
    /// Finite-difference sensitivities of the market SCR to S0 and r0.
    AlmSensitivity,
    /// Real-world expected SCR modules against time for several risk premia.
    AlmPremia,
}

impl Experiment {
    pub fn name(&self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }

    pub fn run(&self, cfg: &Config) -> Result<Table, HarnessError> {
        cfg.validate()?;
        match self {
            Experiment::ToyBias => toy_bias(cfg),
            Experiment::ToyLevelvar => toy_levelvar(cfg),
            Experiment::ToyRmse => toy_rmse(cfg),
            Experiment::ToyLsmc => toy_lsmc(cfg),
            Experiment::AlmSelect => alm_select(cfg),
            Experiment::AlmRmse => alm_rmse(cfg),
            Experiment::AlmEta => alm_eta(cfg),
            Experiment::AlmFrontier => alm_frontier(cfg),
            Experiment::AlmSensitivity => alm_sensitivity(cfg),
            Experiment::AlmPremia => alm_premia(cfg),
        }
    }
}

pub const RMSE_COLUMNS: [&str; 8] = ["estimator", "eta", "epsilon", "n_r", "budget", "rmse", "mean", "reference"];

fn optional<T: Into<Cell>>(v: Option<T>) -> Cell {
    v.map(Into::into).unwrap_or_else(|| Cell::Text(String::new()))
}

/// Runs `estimate` once per macro-replication seed and summarizes it against
/// `reference`: `RMSE = √(mean |Î_b − I|²)`, with the budget averaged over runs.
pub(crate) fn rmse_row(
    label: &str,
    eta: Option<f64>,
    epsilon: Option<f64>,
    n_r: Option<usize>,
    reference: f64,
    cfg: &Config,
    mut estimate: impl FnMut(u64) -> Result<(f64, f64), HarnessError>,
) -> Result<Vec<Cell>, HarnessError> {
    let n = cfg.n_batch;
    let mut sq = 0.0;
    let mut sum = 0.0;
    let mut cost = 0.0;
    for b in 0..n {
        let (v, c) = estimate(cfg.batch_seed(b))?;
        if !v.is_finite() {
            return Err(HarnessError::Numerical(format!("{label}: non-finite estimate")));
        }
        sq += (v - reference) * (v - reference);
        sum += v;
        cost += c;
    }
    let nf = n as f64;
    Ok(vec![
        label.into(),
        optional(eta),
        optional(epsilon),
        optional(n_r),
        (cost / nf).into(),
        (sq / nf).sqrt().into(),
        (sum / nf).into(),
        reference.into(),
    ])
}
