//! Butterfly option under a zero-rate Black–Scholes model with instantaneous
//! multiplicative spot shocks at an intermediate date.
//!
//! With `X = S_t` and `Y = (ψ(S_T) − ψ((1+s_up)S_T), ψ(S_T) − ψ((1+s_down)S_T), 0)`
//! the conditional means are differences of butterfly prices, so the nested
//! quantity `E[max(E[Y¹|X], E[Y²|X], 0)]` reduces to a one-dimensional
//! integral that quadrature evaluates to high accuracy.

mod pricing;
mod problem;

pub use pricing::{butterfly_price, call_bs, norm_cdf, payoff};
pub use problem::{reference_value, ButterflyProblem};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ButterflyError {
    #[error("invalid butterfly input: {0}")]
    Domain(String),
    #[error(transparent)]
    Quadrature(#[from] mlmc_core::quadrature::QuadratureError),
}

/// Model and contract parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButterflyParams {
    pub s0: f64,
    pub sigma: f64,
    /// Lower strike.
    pub k1: f64,
    /// Upper strike.
    pub k2: f64,
    /// Option maturity `T` in years.
    pub maturity: f64,
    /// Shock date `t` in years.
    pub shock_time: f64,
    pub s_up: f64,
    pub s_down: f64,
}

impl Default for ButterflyParams {
    fn default() -> Self {
        Self {
            s0: 100.0,
            sigma: 0.3,
            k1: 50.0,
            k2: 150.0,
            maturity: 2.0,
            shock_time: 1.0,
            s_up: 0.2,
            s_down: -0.2,
        }
    }
}

impl ButterflyParams {
    pub fn validate(&self) -> Result<(), ButterflyError> {
        let ok = self.s0 > 0.0
            && self.sigma > 0.0
            && self.k1 > 0.0
            && self.k1 < self.k2
            && self.shock_time > 0.0
            && self.shock_time < self.maturity
            && self.s_up > -1.0
            && self.s_down > -1.0
            && [self.s0, self.sigma, self.k2, self.maturity, self.s_up, self.s_down]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(ButterflyError::Domain(format!(
                "need S0 > 0, σ > 0, 0 < K1 < K2, 0 < t < T and shocks > −1; got {self:?}"
            )))
        }
    }

    /// Middle strike `(K1 + K2)/2`.
    pub fn middle_strike(&self) -> f64 {
        0.5 * (self.k1 + self.k2)
    }

    /// Time from the shock date to maturity.
    pub fn residual(&self) -> f64 {
        self.maturity - self.shock_time
    }

    /// Standardized log-spot at the shock date, standard normal under the
    /// model: `(ln(X/S0) + σ²t/2)/(σ√t)`.
    pub fn standardized(&self, x: f64) -> f64 {
        let st = self.sigma * self.shock_time.sqrt();
        ((x / self.s0).ln() + 0.5 * st * st) / st
    }
}
