use market_models::{gaussian_triple, simulate_path, step_exact, MarketParams, MarketState, Measure};
use mlmc_core::stats::mean_var;
use mlmc_core::StreamRng;

const N: usize = 1_000_000;

fn within(m: f64, v: f64, n: usize, target: f64) -> bool {
    (m - target).abs() <= 3.0 * (v / n as f64).sqrt()
}

#[test]
fn triple_covariance_matches_analytic_matrix() {
    for gamma in [0.0, 0.5, -0.8] {
        let k = 0.2;
        let mut rng = StreamRng::from_parts(1, 0, 0, 0);
        let mut acc = [[0.0f64; 3]; 3];
        let mut mean = [0.0f64; 3];
        for _ in 0..N {
            let g = gaussian_triple(&mut rng, k, gamma);
            let v = [g.dw, g.dz, g.i_ou];
            for i in 0..3 {
                mean[i] += v[i];
                for j in 0..3 {
                    acc[i][j] += v[i] * v[j];
                }
            }
        }
        let m = (1.0 - (-k).exp()) / k;
        let var_ou = (1.0 - (-2.0 * k).exp()) / (2.0 * k);
        assert!((var_ou - 0.8242).abs() < 1e-4);
        let rho = (1.0 - gamma * gamma).sqrt();
        let expected = [[1.0, 0.0, gamma * m], [0.0, 1.0, rho * m], [gamma * m, rho * m, var_ou]];
        for i in 0..3 {
            for j in 0..3 {
                let cov = acc[i][j] / N as f64 - mean[i] * mean[j] / (N as f64 * N as f64);
                assert!((cov - expected[i][j]).abs() < 5e-3, "γ={gamma} ({i},{j}): {cov} vs {}", expected[i][j]);
            }
        }
    }
}

#[test]
fn one_step_factor_moments() {
    let p = MarketParams {
        x0: 0.05,
        ..Default::default()
    };
    let s0 = MarketState::initial(&p);
    let mut rng = StreamRng::from_parts(2, 0, 0, 0);
    let xs: Vec<f64> = (0..N)
        .map(|_| step_exact(&s0, &p, &gaussian_triple(&mut rng, p.k, p.gamma)).x)
        .collect();
    let (m, v) = mean_var(&xs);
    let e = (-p.k).exp();
    assert!(within(m, v, N, 0.05 * e + p.theta * (1.0 - e)));
    let var = p.sigma_r * p.sigma_r * (1.0 - (-2.0 * p.k).exp()) / (2.0 * p.k);
    // Variance of the sample variance of a Gaussian is 2σ⁴/(n−1).
    assert!((v - var).abs() <= 3.0 * (2.0 * var * var / (N - 1) as f64).sqrt());
}

#[test]
fn deterministic_limit() {
    let p = MarketParams {
        sigma_s: 0.0,
        sigma_r: 0.0,
        lambda_w: 0.3,
        ..Default::default()
    };
    let path = simulate_path(&p, 10, Measure::RiskNeutral, &mut StreamRng::from_parts(3, 0, 0, 0)).unwrap();
    for st in &path.states {
        assert!((st.s - (0.02 * st.t as f64).exp()).abs() < 1e-14);
        assert!((st.x - 0.02).abs() < 1e-16);
    }
    let q = MarketParams { lambda_w: 0.0, ..p };
    let path = simulate_path(&q, 10, Measure::RiskNeutral, &mut StreamRng::from_parts(3, 0, 0, 0)).unwrap();
    assert!(path.states.iter().all(|s| s.l == 1.0));
}

#[test]
fn discounted_stock_is_a_martingale() {
    let p = MarketParams {
        gamma: 0.5,
        ..Default::default()
    };
    let t = 10;
    let vals: Vec<f64> = (0..N as u64)
        .map(|j| {
            let path = simulate_path(&p, t, Measure::RiskNeutral, &mut StreamRng::from_parts(4, 0, j, 0)).unwrap();
            let int_r: f64 = path.states.iter().map(|s| s.int_r).sum();
            (-int_r).exp() * path.last().s
        })
        .collect();
    let (m, v) = mean_var(&vals);
    assert!(within(m, v, N, p.s0), "{m} ± {}", (v / N as f64).sqrt());
}

#[test]
fn density_has_unit_mean() {
    for gamma in [0.0, 0.5] {
        for (lw, lz) in [(0.2, 0.0), (0.0, 0.2), (0.2, 0.2)] {
            let p = MarketParams {
                gamma,
                lambda_w: lw,
                lambda_z: lz,
                ..Default::default()
            };
            let n = N / 4;
            let ls: Vec<f64> = (0..n as u64)
                .map(|j| {
                    simulate_path(&p, 5, Measure::RiskNeutral, &mut StreamRng::from_parts(5, 0, j, 0))
                        .unwrap()
                        .last()
                        .l
                })
                .collect();
            let (m, v) = mean_var(&ls);
            assert!(within(m, v, n, 1.0), "γ={gamma} λ=({lw},{lz}): {m}");
        }
    }
}

#[test]
fn real_measure_paths_agree_with_reweighted_paths() {
    let p = MarketParams {
        gamma: 0.5,
        lambda_w: 0.3,
        lambda_z: -0.2,
        ..Default::default()
    };
    let n = 400_000;
    let run = |measure: Measure, seed: u64| -> (Vec<f64>, Vec<f64>) {
        (0..n as u64)
            .map(|j| {
                let path = simulate_path(&p, 3, measure, &mut StreamRng::from_parts(seed, 0, j, 0)).unwrap();
                let st = path.last();
                let w = if measure == Measure::RiskNeutral { st.l } else { 1.0 };
                (w * st.s, w * st.x)
            })
            .unzip()
    };
    let (sp, xp) = run(Measure::Real, 6);
    let (sq, xq) = run(Measure::RiskNeutral, 7);
    for (a, b) in [(&sp, &sq), (&xp, &xq)] {
        let (ma, va) = mean_var(a);
        let (mb, vb) = mean_var(b);
        let se = ((va + vb) / n as f64).sqrt();
        assert!((ma - mb).abs() <= 3.5 * se, "{ma} vs {mb} ± {se}");
    }
    // Under the real measure the stock earns the extra drift σ_S λ^W.
    let (m, _) = mean_var(&sp);
    assert!(m > 1.1, "{m}");
}
