use mlmc_core::discrete::DiscreteProblem;
use mlmc_core::lsmc::{lsmc_estimate, nested_targets, HypercubePartition, PartitionSpec};
use mlmc_core::stats::mean_var;
use mlmc_core::{antithetic_mlmc_estimate, mlmc_estimate, nested_estimate, Aggregator, LevelSchedule};

fn within(value: f64, target: f64, se: f64, k: f64) -> bool {
    (value - target).abs() <= k * se
}

#[test]
fn nested_matches_enumerated_expectation() {
    let pb = DiscreteProblem::example();
    let agg = Aggregator::max();
    for (k, seed) in [(8, 1), (64, 2)] {
        let r = nested_estimate(&pb, &agg, 200_000, k, seed).unwrap();
        let expected = pb.expected_nested(&agg, k);
        assert!(within(r.value, expected, r.std_error, 3.0), "K={k}: {} vs {expected} ± {}", r.value, r.std_error);
    }
}

#[test]
fn nested_converges_to_exact_value() {
    let pb = DiscreteProblem::example();
    let agg = Aggregator::max();
    let exact = pb.exact_value(&agg);
    let r = nested_estimate(&pb, &agg, 50_000, 2048, 3).unwrap();
    let bias = pb.expected_nested(&agg, 2048) - exact;
    assert!(bias.abs() < r.std_error);
    assert!(within(r.value, exact, r.std_error, 3.0 + bias.abs() / r.std_error));
}

#[test]
fn multilevel_estimators_match_finest_level_expectation() {
    let pb = DiscreteProblem::example();
    let agg = Aggregator::max();
    let sched = LevelSchedule::from_replications(2, vec![40_000, 20_000, 10_000, 5_000]).unwrap();
    let target = pb.expected_nested(&agg, 16);
    let m = mlmc_estimate(&pb, &agg, &sched, 4).unwrap();
    let a = antithetic_mlmc_estimate(&pb, std::slice::from_ref(&agg), &sched, 4).unwrap();
    assert!(within(m.value, target, m.std_error, 3.0), "{} vs {target}", m.value);
    assert!(within(a[0].value, target, a[0].std_error, 3.0), "{} vs {target}", a[0].value);
}

#[test]
fn level_corrections_have_the_telescoping_mean() {
    let pb = DiscreteProblem::example();
    let agg = Aggregator::max();
    let sched = LevelSchedule::from_replications(2, vec![64, 32, 16, 8]).unwrap();
    let reps = 4_000;
    let mut plain = vec![Vec::with_capacity(reps); sched.k.len()];
    let mut anti = vec![Vec::with_capacity(reps); sched.k.len()];
    for seed in 0..reps as u64 {
        let m = mlmc_estimate(&pb, &agg, &sched, seed).unwrap();
        let a = antithetic_mlmc_estimate(&pb, std::slice::from_ref(&agg), &sched, seed).unwrap();
        for l in 0..sched.k.len() {
            plain[l].push(m.levels[l].mean);
            anti[l].push(a[0].levels[l].mean);
        }
    }
    for l in 1..sched.k.len() {
        let expected = pb.expected_nested(&agg, sched.k[l]) - pb.expected_nested(&agg, sched.k[l - 1]);
        for (name, series) in [("plain", &plain[l]), ("antithetic", &anti[l])] {
            let (mean, var) = mean_var(series);
            let se = (var / reps as f64).sqrt();
            assert!(within(mean, expected, se, 3.5), "{name} level {l}: {mean} vs {expected} ± {se}");
        }
    }
}

#[test]
fn lsmc_with_one_cell_per_atom() {
    let pb = DiscreteProblem::example();
    let agg = Aggregator::max();
    let part = HypercubePartition::new(3, vec![(-0.5, 2.5)]).unwrap();
    let features = |i: &usize| vec![pb.atoms()[*i].value];
    let r = lsmc_estimate(&pb, &agg, &features, 200_000, &PartitionSpec::Fixed(part), 5).unwrap();
    let exact = pb.exact_value(&agg);
    assert!(within(r.value, exact, r.std_error, 3.0), "{} vs {exact} ± {}", r.value, r.std_error);
    assert_eq!(r.total_cost, 200_000.0);
}

#[test]
fn nested_targets_converge_to_conditional_values() {
    let pb = DiscreteProblem::example();
    let agg = Aggregator::max();
    let scenarios = vec![0usize, 1, 2];
    let t = nested_targets(&pb, &agg, &scenarios, 200_000, 9).unwrap();
    for (i, v) in t.iter().enumerate() {
        let exact = agg.apply(&pb.conditional_means(i));
        assert!((v - exact).abs() < 0.02, "atom {i}: {v} vs {exact}");
    }
    let single = nested_targets(&pb, &agg, &scenarios, 1, 9).unwrap();
    for (i, v) in single.iter().enumerate() {
        assert!(pb.atoms()[i].inner.iter().any(|(_, y)| agg.apply(y) == *v));
    }
    assert!(nested_targets(&pb, &agg, &scenarios, 0, 9).is_err());
}

#[test]
fn lsmc_std_error_covers_coefficient_noise() {
    let pb = DiscreteProblem::example();
    let agg = Aggregator::max();
    let exact = pb.exact_value(&agg);
    let part = PartitionSpec::Fixed(HypercubePartition::new(3, vec![(-0.5, 2.5)]).unwrap());
    let features = |i: &usize| vec![pb.atoms()[*i].value];
    let z: Vec<f64> = (0..300u64)
        .map(|seed| {
            let r = lsmc_estimate(&pb, &agg, &features, 20_000, &part, 1_000 + seed).unwrap();
            (r.value - exact) / r.std_error
        })
        .collect();
    let (m, v) = mean_var(&z);
    assert!(m.abs() < 0.25, "mean z {m}");
    assert!((0.8..1.25).contains(&v.sqrt()), "sd of z {}", v.sqrt());
}
