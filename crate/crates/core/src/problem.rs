//! Problem abstraction: samplers for `X` and `Y | X`, the weight `φ(X)` and
//! aggregation functions `h`.

use std::fmt;
use std::sync::Arc;

use crate::error::SampleError;
use crate::rng::StreamRng;

/// A nested expectation `E[h(E[Y¹|X],…,E[Yᴾ|X]) φ(X)]`.
///
/// Samplers are called concurrently from several workers, each with its own
/// stream. Repeated calls to [`sample_inner`](Self::sample_inner) with
/// independent streams and the same outer sample must produce i.i.d. draws
/// of `Y | X`, and [`weight`](Self::weight) must depend on the outer sample
/// only.
pub trait NestedProblem: Sync {
    type Outer: Send + Sync;

    /// Number of inner components `P`.
    fn components(&self) -> usize;

    fn sample_outer(&self, rng: &mut StreamRng) -> Result<Self::Outer, SampleError>;

    /// Writes one draw of `Y | X = outer` into `out` (length `P`).
    fn sample_inner(
        &self,
        outer: &Self::Outer,
        rng: &mut StreamRng,
        out: &mut [f64],
    ) -> Result<(), SampleError>;

    fn weight(&self, outer: &Self::Outer) -> f64;

    /// Relative cost of one inner draw, used for cost accounting.
    fn inner_cost_hint(&self) -> f64 {
        1.0
    }

    /// Exact conditional means `E[Yᵖ | X = outer]` when the problem knows
    /// them in closed form. Used by bias diagnostics as a control.
    fn exact_conditional_means(&self, _outer: &Self::Outer) -> Option<Vec<f64>> {
        None
    }
}

type AggFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Deterministic aggregation `h: ℝᴾ → ℝ` applied to per-component means.
#[derive(Clone)]
pub struct Aggregator {
    label: String,
    apply: Arc<AggFn>,
}

impl Aggregator {
    pub fn new(label: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            apply: Arc::new(f),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn apply(&self, means: &[f64]) -> f64 {
        (self.apply)(means)
    }

    /// `max(x₁, …, x_P)`.
    pub fn max() -> Self {
        Self::new("max", |x: &[f64]| x.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// `max(x₁, …, x_P, 0)`: the maximum with an appended zero coordinate.
    pub fn positive_max() -> Self {
        Self::new("positive_max", |x: &[f64]| x.iter().copied().fold(0.0, f64::max))
    }

    /// Projection on one component, `h(x) = x_p`.
    pub fn component(p: usize) -> Self {
        Self::new(format!("component_{p}"), move |x: &[f64]| x[p])
    }
}

impl fmt::Debug for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Aggregator").field("label", &self.label).finish()
    }
}
