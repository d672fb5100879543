//! Monte-Carlo estimators for nested expectations of the form
//! `E[h(E[Y¹|X], …, E[Yᴾ|X]) φ(X)]`.
//!
//! The crate provides:
//! - a [`NestedProblem`] abstraction (outer sampler, inner sampler, weight),
//! - the plain nested estimator, the multilevel estimator and its antithetic
//!   variant with the associated level schedules,
//! - an indicator-basis least-squares Monte-Carlo baseline with forward
//!   feature selection,
//! - a counter-based random stream so every estimate is a pure function of
//!   `(problem, schedule, seed)` regardless of thread count.

pub mod diagnostics;
pub mod discrete;
pub mod error;
pub mod estimator;
pub mod lsmc;
pub mod problem;
pub mod quadrature;
pub mod rng;
pub mod schedule;
pub mod stats;

pub use diagnostics::{level_diagnostics, LevelDiagnostic};
pub use error::{EstimatorError, SampleError};
pub use estimator::{
    antithetic_mlmc_estimate, antithetic_h, mlmc_estimate, nested_estimate, EstimatorReport,
    LevelRecord,
};
pub use problem::{Aggregator, NestedProblem};
pub use rng::{StreamKey, StreamRng};
pub use schedule::{schedule_antithetic, schedule_plain, EstimatorConfig, LevelSchedule};
