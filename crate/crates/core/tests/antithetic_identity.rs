use mlmc_core::antithetic_h;
use mlmc_core::rng::StreamRng;
use proptest::prelude::*;
use rand::Rng;

fn closed_form(x: f64, y: f64) -> f64 {
    if x * y <= 0.0 {
        -0.5 * x.abs().min(y.abs())
    } else {
        0.0
    }
}

#[test]
fn exact_on_sign_grid() {
    let grid = [-7.5, -3.0, -1.0, -0.25, -0.0, 0.0, 0.25, 1.0, 3.0, 7.5];
    for &x in &grid {
        for &y in &grid {
            assert_eq!(antithetic_h(x, y), closed_form(x, y), "({x}, {y})");
        }
    }
}

#[test]
fn random_pairs_within_one_ulp_of_scale() {
    let mut rng = StreamRng::from_parts(2024, 0, 0, 0);
    for _ in 0..200_000 {
        let x = (rng.random::<f64>() - 0.5) * 10f64.powi(rng.random_range(-3..4));
        let y = (rng.random::<f64>() - 0.5) * 10f64.powi(rng.random_range(-3..4));
        let scale = x.abs().max(y.abs());
        assert!((antithetic_h(x, y) - closed_form(x, y)).abs() <= f64::EPSILON * scale);
    }
}

proptest! {
    #[test]
    fn identity_holds(x in -1e6f64..1e6, y in -1e6f64..1e6) {
        let scale = x.abs().max(y.abs());
        prop_assert!((antithetic_h(x, y) - closed_form(x, y)).abs() <= f64::EPSILON * scale);
    }

    #[test]
    fn never_positive(x in -1e3f64..1e3, y in -1e3f64..1e3) {
        prop_assert!(antithetic_h(x, y) <= 0.0);
    }
}
