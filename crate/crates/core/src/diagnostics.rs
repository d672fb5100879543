//! Bias and level-variance diagnostics of the nested estimator.

use crate::error::EstimatorError;
use crate::estimator::simulate_level;
use crate::problem::{Aggregator, NestedProblem};
use crate::stats::mean_var;

/// One row of [`level_diagnostics`].
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDiagnostic {
    pub k: usize,
    pub j: usize,
    /// Nested estimate at `K` inner draws.
    pub estimate: f64,
    pub std_error: f64,
    /// Estimated bias `E[M_K] − I`.
    pub bias_proxy: f64,
    /// Standard error of `bias_proxy`.
    pub bias_std_error: f64,
    /// Variance of `[h(Ê_K) − h(Ê_{K/2})] φ`.
    pub var_plain: f64,
    /// Variance of `[h(Ê_K) − ½(h(Ê_{K/2}) + h(Ê′_{K/2}))] φ`.
    pub var_antithetic: f64,
}

/// Runs `J` scenarios at every `K` in `ks` and reports bias and level
/// variances. Row `i` uses its own stream level `i`.
///
/// When the problem knows its conditional means, the bias is estimated as
/// the mean of `[h(Ê_K) − h(E[Y|X])] φ` over the same scenarios, which
/// removes the outer sampling noise. Otherwise it is the estimate minus
/// `reference`.
pub fn level_diagnostics<P: NestedProblem>(
    problem: &P,
    agg: &Aggregator,
    ks: &[usize],
    j: usize,
    reference: f64,
    seed: u64,
) -> Result<Vec<LevelDiagnostic>, EstimatorError> {
    if let Some(&k) = ks.iter().find(|&&k| k < 2 || k % 2 != 0) {
        return Err(EstimatorError::Config(format!(
            "diagnostic inner counts must be even and at least 2, got {k}"
        )));
    }
    let aggs = std::slice::from_ref(agg);
    ks.iter()
        .enumerate()
        .map(|(i, &k)| {
            let values = simulate_level(problem, aggs, i as u64, j, k, true, true, seed)?;
            let fine: Vec<f64> = values.iter().map(|v| v.fine[0]).collect();
            let plain: Vec<f64> = values.iter().map(|v| v.plain[0]).collect();
            let anti: Vec<f64> = values.iter().map(|v| v.antithetic[0]).collect();
            let (estimate, var_fine) = mean_var(&fine);
            let std_error = (var_fine / j as f64).sqrt();

            let paired: Option<Vec<f64>> = values
                .iter()
                .map(|v| v.exact.as_ref().map(|e| v.fine[0] - e[0]))
                .collect();
            let (bias_proxy, bias_std_error) = match paired {
                Some(d) => {
                    let (m, v) = mean_var(&d);
                    (m, (v / j as f64).sqrt())
                }
                None => (estimate - reference, std_error),
            };

            Ok(LevelDiagnostic {
                k,
                j,
                estimate,
                std_error,
                bias_proxy,
                bias_std_error,
                var_plain: mean_var(&plain).1,
                var_antithetic: mean_var(&anti).1,
            })
        })
        .collect()
}
