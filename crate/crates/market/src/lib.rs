//! Joint stock / short-rate model used by the ALM engine.
//!
//! The stock follows Black–Scholes with the short rate as drift; the short
//! rate is `r_t = x_t + φ(t)` with `x` an Ornstein–Uhlenbeck factor and `φ` a
//! deterministic, piecewise-constant annual shift. One-year transitions are
//! sampled exactly. Interest-rate shocks are carried by the shift only.

mod params;
mod pricing;
mod sampler;
mod shock;

pub use params::{MarketParams, ShiftCurve};
pub use pricing::{bond_value, calibrate_shift, portfolio_value, swap_rate, zero_rates, AffineTable};
pub use sampler::{gaussian_triple, simulate_path, step_exact, to_real_measure, GaussianTriple, MarketScenario, MarketState, Measure};
pub use shock::{apply_rate_shock, Direction, RateShock};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("invalid market parameter: {0}")]
    Param(String),
    #[error("rate shock: {0}")]
    Shock(String),
    #[error("shock table line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("pricing: {0}")]
    Pricing(String),
}
