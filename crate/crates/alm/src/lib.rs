//! Life-insurance savings ALM model: a path-dependent balance-sheet
//! projection (bond ladder, equities, reserves, crediting waterfall), basic
//! own funds by inner simulation, and the standard-formula market SCR at a
//! future date cast as a nested expectation.

pub mod crediting;
mod params;
mod projection;
mod scr;
mod sensitivity;
mod sheet;

pub use crediting::{credit, CreditingCase, CreditingInput, CreditingOutcome};
pub use params::AlmParams;
pub use projection::{project, step_in_place, step_year, StepMarket, Workspace, YearOutcome};
pub use scr::{
    aggregate_mkt, scr_aggregators, OuterMeasure, OuterState, ScrConfig, ScrProblem, ScrReport, Shock, ShockSpec, SCR_LABELS,
};
pub use sensitivity::{sensitivity, Bump, SensitivityResult};
pub use sheet::{risk_factors, BalanceSheet, RISK_FACTOR_NAMES};

use market_models::MarketError;
use mlmc_core::{EstimatorError, SampleError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlmError {
    #[error("invalid ALM input: {0}")]
    Param(String),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("accounting invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

impl From<AlmError> for SampleError {
    fn from(e: AlmError) -> Self {
        SampleError::new(e.to_string())
    }
}
