use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{MarketError, MarketParams};

/// Gaussian increments of one year: the two Brownian increments and the
/// Ornstein–Uhlenbeck stochastic integral `∫ e^{-k(t-u)} dB_u` of the rate
/// driver `B = γW + √(1−γ²)Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTriple {
    pub dw: f64,
    pub dz: f64,
    pub i_ou: f64,
}

/// Loadings of the OU integral on three independent standard normals.
fn ou_loadings(k: f64, gamma: f64) -> (f64, f64, f64) {
    let m = -(-k).exp_m1() / k;
    let var = -(-2.0 * k).exp_m1() / (2.0 * k);
    let a = gamma * m;
    let b = (1.0 - gamma * gamma).max(0.0).sqrt() * m;
    (a, b, (var - m * m).max(0.0).sqrt())
}

/// Samples one year of increments under the risk-neutral measure.
pub fn gaussian_triple<R: Rng + ?Sized>(rng: &mut R, k: f64, gamma: f64) -> GaussianTriple {
    let (a, b, c) = ou_loadings(k, gamma);
    let n1: f64 = StandardNormal.sample(rng);
    let n2: f64 = StandardNormal.sample(rng);
    let n3: f64 = StandardNormal.sample(rng);
    GaussianTriple {
        dw: n1,
        dz: n2,
        i_ou: a * n1 + b * n2 + c * n3,
    }
}

/// Market state at an integer date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    pub t: usize,
    pub s: f64,
    pub x: f64,
    /// Short rate `x_t + φ(t)`.
    pub r: f64,
    /// Density of the real-world measure with respect to the risk-neutral one.
    pub l: f64,
    /// `∫ r` over the year ending at `t` (0 at the initial date).
    pub int_r: f64,
}

impl MarketState {
    pub fn initial(params: &MarketParams) -> Self {
        Self {
            t: 0,
            s: params.s0,
            x: params.x0,
            r: params.r0(),
            l: 1.0,
            int_r: 0.0,
        }
    }

    /// One-year discount factor `exp(−∫ r)` of the year ending at `t`.
    pub fn discount(&self) -> f64 {
        (-self.int_r).exp()
    }
}

/// Exact one-year transition from `state` driven by risk-neutral increments.
pub fn step_exact(state: &MarketState, params: &MarketParams, g: &GaussianTriple) -> MarketState {
    let k = params.k;
    let decay = (-k).exp();
    let rho = (1.0 - params.gamma * params.gamma).max(0.0).sqrt();
    let db = params.gamma * g.dw + rho * g.dz;
    let x = state.x * decay + params.theta * (1.0 - decay) + params.sigma_r * g.i_ou;
    let int_x = (state.x - x) / k + params.theta + params.sigma_r / k * db;
    let int_r = int_x + params.shift.value(state.t);
    let vs = params.sigma_s;
    let s = state.s * (int_r + vs * g.dw - 0.5 * vs * vs).exp();
    let (lw, lz) = (params.lambda_w, params.lambda_z);
    let l = state.l * (lw * g.dw + lz * g.dz - 0.5 * (lw * lw + lz * lz)).exp();
    let t = state.t + 1;
    MarketState {
        t,
        s,
        x,
        r: x + params.shift.value(t),
        l,
        int_r,
    }
}

/// Measure under which paths are generated. Transitions are always expressed
/// through risk-neutral increments; under the real-world measure those
/// increments carry the drift `(λ^W, λ^Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    RiskNeutral,
    Real,
}

/// Risk-neutral increments of a real-world year: a real-world draw `g` plus
/// the drift `(λ^W, λ^Z)` and the OU integral of that drift.
pub fn to_real_measure(g: &GaussianTriple, params: &MarketParams) -> GaussianTriple {
    let m = -(-params.k).exp_m1() / params.k;
    let rho = (1.0 - params.gamma * params.gamma).max(0.0).sqrt();
    GaussianTriple {
        dw: g.dw + params.lambda_w,
        dz: g.dz + params.lambda_z,
        i_ou: g.i_ou + (params.gamma * params.lambda_w + rho * params.lambda_z) * m,
    }
}

/// Sampled states at dates `0, 1, …, horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketScenario {
    pub states: Vec<MarketState>,
}

impl MarketScenario {
    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    pub fn last(&self) -> &MarketState {
        self.states.last().expect("scenario holds the initial state")
    }
}

/// Simulates `horizon` years from the initial state.
pub fn simulate_path<R: Rng + ?Sized>(
    params: &MarketParams,
    horizon: usize,
    measure: Measure,
    rng: &mut R,
) -> Result<MarketScenario, MarketError> {
    params.validate()?;
    let mut states = Vec::with_capacity(horizon + 1);
    states.push(MarketState::initial(params));
    for _ in 0..horizon {
        let mut g = gaussian_triple(rng, params.k, params.gamma);
        if measure == Measure::Real {
            g = to_real_measure(&g, params);
        }
        let next = step_exact(states.last().unwrap(), params, &g);
        states.push(next);
    }
    Ok(MarketScenario { states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ShiftCurve;
    use mlmc_core::StreamRng;

    #[test]
    fn loadings_reproduce_ou_variance() {
        for (k, g) in [(0.2, 0.0), (0.2, 0.5), (1.5, -0.9), (1e-4, 0.3)] {
            let (a, b, c) = ou_loadings(k, g);
            let var = (1.0 - (-2.0 * k).exp()) / (2.0 * k);
            assert!((a * a + b * b + c * c - var).abs() < 1e-12);
            assert!((a - g * (1.0 - (-k).exp()) / k).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_volatility_is_deterministic() {
        let p = MarketParams {
            sigma_s: 0.0,
            sigma_r: 0.0,
            x0: 0.05,
            theta: 0.02,
            shift: ShiftCurve::new(vec![0.01], 0.0).unwrap(),
            ..Default::default()
        };
        let mut rng = StreamRng::from_parts(1, 0, 0, 0);
        let path = simulate_path(&p, 3, Measure::RiskNeutral, &mut rng).unwrap();
        let s1 = &path.states[1];
        let x1 = 0.02 + 0.03 * (-0.2f64).exp();
        assert!((s1.x - x1).abs() < 1e-15);
        // ∫x = θ + (x0 − θ)(1 − e^{-k})/k
        let int_x = 0.02 + 0.03 * (1.0 - (-0.2f64).exp()) / 0.2;
        assert!((s1.int_r - (int_x + 0.01)).abs() < 1e-15);
        assert!((s1.s - (int_x + 0.01).exp()).abs() < 1e-14);
        assert_eq!(s1.r, s1.x);
        assert!((path.states[0].r - 0.06).abs() < 1e-16);
        assert_eq!(s1.l, 1.0);
        assert_eq!(path.horizon(), 3);
    }

    #[test]
    fn zero_prices_of_risk_make_measures_coincide() {
        let p = MarketParams::default();
        let a = simulate_path(&p, 5, Measure::RiskNeutral, &mut StreamRng::from_parts(3, 0, 0, 0)).unwrap();
        let b = simulate_path(&p, 5, Measure::Real, &mut StreamRng::from_parts(3, 0, 0, 0)).unwrap();
        assert_eq!(a, b);
    }
}
