use market_models::{
    apply_rate_shock, bond_value, calibrate_shift, portfolio_value, simulate_path, swap_rate, zero_rates,
    AffineTable, Direction, MarketParams, Measure, RateShock, ShiftCurve,
};
use mlmc_core::stats::mean_var;
use mlmc_core::StreamRng;

#[test]
fn zero_coupon_matches_monte_carlo() {
    let p = MarketParams {
        x0: 0.035,
        sigma_r: 0.02,
        gamma: 0.3,
        shift: ShiftCurve::new(vec![0.004, -0.002, 0.001], 0.003).unwrap(),
        ..Default::default()
    };
    let table = AffineTable::new(&p, 10).unwrap();
    let n = 1_000_000;
    let mut sums = vec![Vec::with_capacity(n); 3];
    for j in 0..n as u64 {
        let path = simulate_path(&p, 10, Measure::RiskNeutral, &mut StreamRng::from_parts(10, 0, j, 0)).unwrap();
        let mut cum = 0.0;
        for (t, st) in path.states.iter().enumerate().skip(1) {
            cum += st.int_r;
            match t {
                1 => sums[0].push((-cum).exp()),
                5 => sums[1].push((-cum).exp()),
                10 => sums[2].push((-cum).exp()),
                _ => {}
            }
        }
    }
    for (vals, i) in sums.iter().zip([1, 5, 10]) {
        let (m, v) = mean_var(vals);
        let exact = table.zc_price(0, p.x0, &p.shift, i).unwrap();
        let se = (v / n as f64).sqrt();
        assert!((m - exact).abs() <= 3.0 * se, "i={i}: {m} vs {exact} ± {se}");
    }
}

#[test]
fn zero_coupon_trivial_cases() {
    let p = MarketParams {
        sigma_r: 0.0,
        ..Default::default()
    };
    let t = AffineTable::new(&p, 40).unwrap();
    for i in 0..=40 {
        let v = t.zc_price(7, p.theta, &ShiftCurve::zero(), i).unwrap();
        assert!((v - (-0.02 * i as f64).exp()).abs() < 1e-15);
    }
    let g = AffineTable::new(&MarketParams::default(), 5).unwrap();
    assert_eq!(g.zc_price(0, 0.3, &ShiftCurve::flat(0.1), 0).unwrap(), 1.0);
}

#[test]
fn swap_and_bond_examples() {
    let zc: Vec<f64> = (0..=5).map(|i| (-0.02 * i as f64).exp()).collect();
    assert!((swap_rate(&zc, 1).unwrap() - 0.020201340026756).abs() < 1e-14);
    assert_eq!(swap_rate(&[1.0; 6], 4).unwrap(), 0.0);
    assert!((bond_value(&[1.0, 0.98], 1, 0.02).unwrap() - 0.9996).abs() < 1e-15);
    assert!(swap_rate(&[1.0, 0.0, 0.0], 2).is_err());
}

#[test]
fn par_identity_on_simulated_curves() {
    let p = MarketParams::default();
    let table = AffineTable::new(&p, 50).unwrap();
    for j in 0..200 {
        let path = simulate_path(&p, 30, Measure::RiskNeutral, &mut StreamRng::from_parts(11, 0, j, 0)).unwrap();
        for st in &path.states {
            let zc = table.curve(st.t, st.x, &p.shift, 20).unwrap();
            let coupons: Vec<f64> = (1..=20).map(|m| swap_rate(&zc, m).unwrap()).collect();
            for (m, c) in coupons.iter().enumerate() {
                assert!((bond_value(&zc, m + 1, *c).unwrap() - 1.0).abs() < 1e-12);
            }
            assert!((portfolio_value(&zc, &coupons).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn flat_up_shock_moves_curve_to_three_percent() {
    let p = MarketParams {
        sigma_r: 0.0,
        ..Default::default()
    };
    let table = AffineTable::new(&p, 40).unwrap();
    let t = 4;
    let base = table.curve(t, 0.02, &p.shift, 40).unwrap();
    let z = zero_rates(&base);
    let delta = apply_rate_shock(&z, &RateShock::uniform(0.5, 40).unwrap(), Direction::Up).unwrap();
    let shifted = p.shift.with_added_from(t, &delta);
    let shocked = table.curve(t, 0.02, &shifted, 40).unwrap();
    for (i, v) in shocked.iter().enumerate() {
        assert!((v - (-0.03 * i as f64).exp()).abs() < 1e-14, "i={i}");
    }
    // Dates before the shock are untouched.
    assert_eq!(table.curve(0, 0.02, &shifted, 4).unwrap(), table.curve(0, 0.02, &p.shift, 4).unwrap());
}

#[test]
fn up_then_down_composes_multiplicatively() {
    let p = MarketParams::default();
    let table = AffineTable::new(&p, 60).unwrap();
    let shock = RateShock::standard();
    let (t, x) = (2, 0.031);
    let z = zero_rates(&table.curve(t, x, &p.shift, 60).unwrap());
    let up_shift = p.shift.with_added_from(t, &apply_rate_shock(&z, &shock, Direction::Up).unwrap());
    let z_up = zero_rates(&table.curve(t, x, &up_shift, 60).unwrap());
    // Equal-magnitude down shock: the down column set to the up multipliers.
    let mats: Vec<f64> = (1..=60).map(|i| i as f64).collect();
    let up_m: Vec<f64> = mats.iter().map(|&m| shock.multiplier(m, Direction::Up).unwrap()).collect();
    let mirror = RateShock::new(mats, up_m.clone(), up_m.clone()).unwrap();
    let both = up_shift.with_added_from(t, &apply_rate_shock(&z_up, &mirror, Direction::Down).unwrap());
    let z_both = zero_rates(&table.curve(t, x, &both, 60).unwrap());
    for i in 0..60 {
        let expected = z[i] * (1.0 + up_m[i]) * (1.0 - up_m[i]);
        assert!((z_both[i] - expected).abs() < 1e-14, "i={i}: {} vs {expected}", z_both[i]);
    }
}

#[test]
fn calibrated_shift_reproduces_input_curve() {
    let p = MarketParams::default();
    let target: Vec<f64> = (1..=30).map(|i| 0.005 + 0.025 * (1.0 - (-(i as f64) / 8.0).exp())).collect();
    let shift = calibrate_shift(&p, &target).unwrap();
    let table = AffineTable::new(&p, 30).unwrap();
    let z = zero_rates(&table.curve(0, p.x0, &shift, 30).unwrap());
    for (a, b) in z.iter().zip(&target) {
        assert!((a - b).abs() < 1e-14);
    }
    // The model's own curve calibrates to a zero shift.
    let own = zero_rates(&table.curve(0, p.x0, &ShiftCurve::zero(), 30).unwrap());
    let s = calibrate_shift(&p, &own).unwrap();
    assert!(s.values().iter().all(|v| v.abs() < 1e-15));
}
