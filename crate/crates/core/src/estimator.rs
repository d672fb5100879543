//! Nested, multilevel and antithetic multilevel estimators.
//!
//! All three estimators share one level simulator. For scenario `j` of level
//! `l` the outer sample is drawn from stream `(seed, l, j, OUTER)` and inner
//! draw `k` from stream `(seed, l, j, k)`. Scenarios run in parallel, each
//! writing its own output slot; per-level sums use a fixed pairwise
//! reduction, so reports are bit-identical for equal seeds.
//!
//! Aggregators only ever see per-component means, so evaluating several of
//! them on the same simulations costs nothing extra.

use rayon::prelude::*;

use crate::error::EstimatorError;
use crate::problem::{Aggregator, NestedProblem};
use crate::rng::{StreamKey, StreamRng};
use crate::schedule::LevelSchedule;
use crate::stats::mean_var;

/// Statistics of one level of an estimator run.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub j: usize,
    pub k: usize,
    /// Mean of the level summands (level 0: the coarse estimate, otherwise
    /// the correction term).
    pub mean: f64,
    /// Sample variance of the level summands.
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub label: String,
    pub value: f64,
    pub std_error: f64,
    /// `Σ_l J_l K_l × inner_cost_hint`.
    pub total_cost: f64,
    pub levels: Vec<LevelRecord>,
    pub seed: u64,
}

impl EstimatorReport {
    fn from_levels(label: &str, levels: Vec<LevelRecord>, cost_hint: f64, seed: u64) -> Self {
        let value = levels.iter().map(|r| r.mean).sum();
        let std_error = levels
            .iter()
            .map(|r| r.variance / r.j as f64)
            .sum::<f64>()
            .sqrt();
        let total_cost = levels
            .iter()
            .map(|r| r.j as f64 * r.k as f64 * cost_hint)
            .sum();
        Self {
            label: label.to_string(),
            value,
            std_error,
            total_cost,
            levels,
            seed,
        }
    }
}

/// Which correction a multilevel run records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Correction {
    Plain,
    Antithetic,
}

/// Per-scenario output of one level: for every aggregator, the weighted fine
/// value, the plain correction and the antithetic correction.
#[derive(Debug, Clone)]
pub(crate) struct ScenarioValues {
    pub fine: Vec<f64>,
    pub plain: Vec<f64>,
    pub antithetic: Vec<f64>,
    /// Weighted exact aggregate when the problem provides conditional means.
    pub exact: Option<Vec<f64>>,
}

/// Simulates `j` scenarios with `k` inner draws each on stream level
/// `level`. With `split`, draws are accumulated in two halves so that the
/// coarse (first half) and antithetic (second half) means are available.
pub(crate) fn simulate_level<P: NestedProblem>(
    problem: &P,
    aggs: &[Aggregator],
    level: u64,
    j: usize,
    k: usize,
    split: bool,
    with_exact: bool,
    seed: u64,
) -> Result<Vec<ScenarioValues>, EstimatorError> {
    if j == 0 || k == 0 {
        return Err(EstimatorError::Config(format!(
            "J and K must be positive (J = {j}, K = {k})"
        )));
    }
    if split && k % 2 != 0 {
        return Err(EstimatorError::Config(format!(
            "K must be even to split draws into halves, got {k}"
        )));
    }
    let p = problem.components();
    let half = if split { k / 2 } else { k };

    (0..j)
        .into_par_iter()
        .map(|scenario| {
            let mut rng = StreamRng::new(StreamKey::outer(seed, level, scenario as u64));
            let outer = problem.sample_outer(&mut rng)?;
            let phi = problem.weight(&outer);

            let mut draw = vec![0.0; p];
            let mut sum_a = vec![0.0; p];
            let mut sum_b = vec![0.0; p];
            for d in 0..k {
                let mut rng = StreamRng::new(StreamKey::new(seed, level, scenario as u64, d as u64));
                problem.sample_inner(&outer, &mut rng, &mut draw)?;
                let acc = if d < half { &mut sum_a } else { &mut sum_b };
                for (s, y) in acc.iter_mut().zip(&draw) {
                    *s += y;
                }
            }

            let exact = if with_exact {
                problem.exact_conditional_means(&outer).map(|m| {
                    aggs.iter().map(|a| a.apply(&m) * phi).collect::<Vec<_>>()
                })
            } else {
                None
            };

            if !split {
                let means: Vec<f64> = sum_a.iter().map(|s| s / k as f64).collect();
                let fine = aggs.iter().map(|a| a.apply(&means) * phi).collect();
                return Ok(ScenarioValues {
                    fine,
                    plain: vec![0.0; aggs.len()],
                    antithetic: vec![0.0; aggs.len()],
                    exact,
                });
            }

            let mean_a: Vec<f64> = sum_a.iter().map(|s| s / half as f64).collect();
            let mean_b: Vec<f64> = sum_b.iter().map(|s| s / half as f64).collect();
            // The full mean is formed from the half means so that linear
            // aggregators give exactly vanishing antithetic corrections.
            let mean_full: Vec<f64> = mean_a
                .iter()
                .zip(&mean_b)
                .map(|(a, b)| 0.5 * (a + b))
                .collect();

            let mut fine = Vec::with_capacity(aggs.len());
            let mut plain = Vec::with_capacity(aggs.len());
            let mut antithetic = Vec::with_capacity(aggs.len());
            for agg in aggs {
                let h_full = agg.apply(&mean_full);
                let h_a = agg.apply(&mean_a);
                let h_b = agg.apply(&mean_b);
                fine.push(h_full * phi);
                plain.push((h_full - h_a) * phi);
                antithetic.push((h_full - 0.5 * (h_a + h_b)) * phi);
            }
            Ok(ScenarioValues {
                fine,
                plain,
                antithetic,
                exact,
            })
        })
        .collect()
}

fn column(values: &[ScenarioValues], agg: usize, pick: impl Fn(&ScenarioValues) -> &[f64]) -> Vec<f64> {
    values.iter().map(|v| pick(v)[agg]).collect()
}

/// Plain nested estimator `(1/J) Σ_j h(Ê_{j,K}) φ(X_j)`.
pub fn nested_estimate<P: NestedProblem>(
    problem: &P,
    agg: &Aggregator,
    j: usize,
    k: usize,
    seed: u64,
) -> Result<EstimatorReport, EstimatorError> {
    let values = simulate_level(problem, std::slice::from_ref(agg), 0, j, k, false, false, seed)?;
    let (mean, variance) = mean_var(&column(&values, 0, |v| &v.fine));
    let level = LevelRecord {
        level: 0,
        j,
        k,
        mean,
        variance,
    };
    Ok(EstimatorReport::from_levels(
        agg.label(),
        vec![level],
        problem.inner_cost_hint(),
        seed,
    ))
}

pub(crate) fn multilevel<P: NestedProblem>(
    problem: &P,
    aggs: &[Aggregator],
    schedule: &LevelSchedule,
    seed: u64,
    correction: Correction,
) -> Result<Vec<EstimatorReport>, EstimatorError> {
    schedule.validate()?;
    if aggs.is_empty() {
        return Err(EstimatorError::Config("at least one aggregator is required".into()));
    }
    let mut per_agg: Vec<Vec<LevelRecord>> = vec![Vec::with_capacity(schedule.k.len()); aggs.len()];
    for (l, (&k, &j)) in schedule.k.iter().zip(&schedule.j).enumerate() {
        let split = l > 0;
        let values = simulate_level(problem, aggs, l as u64, j, k, split, false, seed)?;
        for (a, records) in per_agg.iter_mut().enumerate() {
            let col = if !split {
                column(&values, a, |v| &v.fine)
            } else {
                match correction {
                    Correction::Plain => column(&values, a, |v| &v.plain),
                    Correction::Antithetic => column(&values, a, |v| &v.antithetic),
                }
            };
            let (mean, variance) = mean_var(&col);
            records.push(LevelRecord {
                level: l,
                j,
                k,
                mean,
                variance,
            });
        }
    }
    let hint = problem.inner_cost_hint();
    Ok(aggs
        .iter()
        .zip(per_agg)
        .map(|(agg, levels)| EstimatorReport::from_levels(agg.label(), levels, hint, seed))
        .collect())
}

/// Multilevel estimator: level 0 is the nested estimator at `K₀`, level
/// `l ≥ 1` adds the mean of `[h(Ê_{K_l}) − h(Ê_{K_{l−1}})] φ` where the coarse
/// mean uses the first `K_{l−1}` of the same draws.
pub fn mlmc_estimate<P: NestedProblem>(
    problem: &P,
    agg: &Aggregator,
    schedule: &LevelSchedule,
    seed: u64,
) -> Result<EstimatorReport, EstimatorError> {
    let mut reports = multilevel(problem, std::slice::from_ref(agg), schedule, seed, Correction::Plain)?;
    Ok(reports.remove(0))
}

/// Antithetic multilevel estimator; level `l ≥ 1` uses
/// `h(Ê_{K_l}) − ½[h(Ê_{K_{l−1}}) + h(Ê′_{K_{l−1}})]` with `Ê′` the mean of
/// the second half of the draws. Every aggregator is evaluated on the same
/// simulations; one report is returned per aggregator, in order.
pub fn antithetic_mlmc_estimate<P: NestedProblem>(
    problem: &P,
    aggs: &[Aggregator],
    schedule: &LevelSchedule,
    seed: u64,
) -> Result<Vec<EstimatorReport>, EstimatorError> {
    multilevel(problem, aggs, schedule, seed, Correction::Antithetic)
}

/// `((x+y)/2)⁺ − (x⁺ + y⁺)/2`, the antithetic correction of the positive
/// part for two half-sample means.
pub fn antithetic_h(x: f64, y: f64) -> f64 {
    (0.5 * (x + y)).max(0.0) - 0.5 * (x.max(0.0) + y.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::SampleError;
    use rand::Rng;

    /// X uniform on (0,1); Y = (X + noise·U, 1 − X + noise·U′).
    struct Noisy {
        noise: f64,
        p: usize,
    }

    impl NestedProblem for Noisy {
        type Outer = f64;
        fn components(&self) -> usize {
            self.p
        }
        fn sample_outer(&self, rng: &mut StreamRng) -> Result<f64, SampleError> {
            Ok(rng.random::<f64>())
        }
        fn sample_inner(&self, x: &f64, rng: &mut StreamRng, out: &mut [f64]) -> Result<(), SampleError> {
            for (i, o) in out.iter_mut().enumerate() {
                let base = if i % 2 == 0 { *x } else { 1.0 - *x };
                *o = base + self.noise * (rng.random::<f64>() - 0.5);
            }
            Ok(())
        }
        fn weight(&self, x: &f64) -> f64 {
            1.0 + x
        }
        fn inner_cost_hint(&self) -> f64 {
            2.5
        }
    }

    struct Failing;
    impl NestedProblem for Failing {
        type Outer = ();
        fn components(&self) -> usize {
            1
        }
        fn sample_outer(&self, _: &mut StreamRng) -> Result<(), SampleError> {
            Ok(())
        }
        fn sample_inner(&self, _: &(), _: &mut StreamRng, _: &mut [f64]) -> Result<(), SampleError> {
            Err(SampleError::new("boom"))
        }
        fn weight(&self, _: &()) -> f64 {
            1.0
        }
    }

    #[test]
    fn nested_is_deterministic() {
        let pb = Noisy { noise: 1.0, p: 2 };
        let a = nested_estimate(&pb, &Aggregator::max(), 300, 7, 11).unwrap();
        let b = nested_estimate(&pb, &Aggregator::max(), 300, 7, 11).unwrap();
        assert_eq!(a, b);
        let c = nested_estimate(&pb, &Aggregator::max(), 300, 7, 12).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn constant_inner_reduces_to_weighted_mean() {
        struct Const;
        impl NestedProblem for Const {
            type Outer = f64;
            fn components(&self) -> usize {
                1
            }
            fn sample_outer(&self, rng: &mut StreamRng) -> Result<f64, SampleError> {
                Ok(rng.random::<f64>())
            }
            fn sample_inner(&self, _: &f64, _: &mut StreamRng, out: &mut [f64]) -> Result<(), SampleError> {
                out[0] = 2.0;
                Ok(())
            }
            fn weight(&self, x: &f64) -> f64 {
                *x
            }
        }
        let r = nested_estimate(&Const, &Aggregator::component(0), 64, 4, 3).unwrap();
        let xs: Vec<f64> = (0..64)
            .map(|j| StreamRng::new(StreamKey::outer(3, 0, j)).random::<f64>())
            .collect();
        let expected = 2.0 * crate::stats::mean(&xs);
        assert!((r.value - expected).abs() < 1e-14);
    }

    #[test]
    fn rejects_zero_counts_and_propagates_failures() {
        let pb = Noisy { noise: 1.0, p: 2 };
        assert!(nested_estimate(&pb, &Aggregator::max(), 0, 4, 1).is_err());
        assert!(nested_estimate(&pb, &Aggregator::max(), 4, 0, 1).is_err());
        let err = nested_estimate(&Failing, &Aggregator::max(), 4, 4, 1).unwrap_err();
        assert!(matches!(err, EstimatorError::Sampler(_)));
    }

    #[test]
    fn single_level_mlmc_equals_nested() {
        let pb = Noisy { noise: 0.7, p: 2 };
        let sched = LevelSchedule::from_replications(6, vec![200]).unwrap();
        let m = mlmc_estimate(&pb, &Aggregator::max(), &sched, 5).unwrap();
        let a = antithetic_mlmc_estimate(&pb, &[Aggregator::max()], &sched, 5).unwrap();
        let n = nested_estimate(&pb, &Aggregator::max(), 200, 6, 5).unwrap();
        assert_eq!(m.value, n.value);
        assert_eq!(a[0].value, n.value);
        assert_eq!(m.std_error, n.std_error);
    }

    #[test]
    fn deterministic_inner_gives_zero_corrections() {
        let pb = Noisy { noise: 0.0, p: 3 };
        let sched = LevelSchedule::from_replications(2, vec![50, 20, 10, 5]).unwrap();
        let m = mlmc_estimate(&pb, &Aggregator::max(), &sched, 1).unwrap();
        let a = antithetic_mlmc_estimate(&pb, &[Aggregator::max()], &sched, 1).unwrap();
        for r in m.levels.iter().chain(&a[0].levels).skip(1) {
            if r.level > 0 {
                assert_eq!(r.mean, 0.0);
                assert_eq!(r.variance, 0.0);
            }
        }
    }

    #[test]
    fn single_component_antithetic_is_exactly_zero() {
        let pb = Noisy { noise: 3.0, p: 1 };
        let sched = LevelSchedule::from_replications(2, vec![40, 20, 10, 5, 3]).unwrap();
        for seed in 0..5 {
            let a = antithetic_mlmc_estimate(&pb, &[Aggregator::component(0)], &sched, seed).unwrap();
            for r in &a[0].levels[1..] {
                assert_eq!(r.mean, 0.0);
                assert_eq!(r.variance, 0.0);
            }
        }
    }

    #[test]
    fn cost_accounting() {
        let pb = Noisy { noise: 1.0, p: 2 };
        let sched = LevelSchedule::from_replications(4, vec![30, 12, 5]).unwrap();
        let a = antithetic_mlmc_estimate(&pb, &[Aggregator::max(), Aggregator::positive_max()], &sched, 9)
            .unwrap();
        let expected = (30.0 * 4.0 + 12.0 * 8.0 + 5.0 * 16.0) * 2.5;
        for r in &a {
            assert_eq!(r.total_cost, expected);
            assert!(r.std_error >= 0.0);
        }
        assert_eq!(a[0].label, "max");
        assert_eq!(a[1].label, "positive_max");
    }

    #[test]
    fn multi_aggregator_matches_single_runs() {
        let pb = Noisy { noise: 1.0, p: 2 };
        let sched = LevelSchedule::from_replications(2, vec![40, 16, 8]).unwrap();
        let both = antithetic_mlmc_estimate(&pb, &[Aggregator::max(), Aggregator::component(1)], &sched, 4)
            .unwrap();
        let single = antithetic_mlmc_estimate(&pb, &[Aggregator::component(1)], &sched, 4).unwrap();
        assert_eq!(both[1], single[0]);
    }

    #[test]
    fn mlmc_rejects_broken_schedule() {
        let pb = Noisy { noise: 1.0, p: 2 };
        let bad = LevelSchedule {
            k: vec![2, 6],
            j: vec![3, 3],
        };
        assert!(matches!(
            mlmc_estimate(&pb, &Aggregator::max(), &bad, 1),
            Err(EstimatorError::Schedule(_))
        ));
        assert!(antithetic_mlmc_estimate(&pb, &[], &LevelSchedule::from_replications(2, vec![1]).unwrap(), 1).is_err());
    }

    #[test]
    fn antithetic_h_examples() {
        assert_eq!(antithetic_h(3.0, 4.0), 0.0);
        assert_eq!(antithetic_h(3.0, -4.0), -1.5);
        assert_eq!(antithetic_h(0.0, -5.0), 0.0);
    }
}
