use mlmc_core::quadrature::expect_standard_normal;
use mlmc_core::{NestedProblem, SampleError, StreamRng};
use rand_distr::{Distribution, StandardNormal};

use crate::pricing::{butterfly_unchecked, payoff};
use crate::{ButterflyError, ButterflyParams};

/// The shocked-butterfly nested problem, `P = 3`, weight 1, to be used with
/// the maximum aggregator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButterflyProblem {
    params: ButterflyParams,
}

impl ButterflyProblem {
    pub fn new(params: ButterflyParams) -> Result<Self, ButterflyError> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &ButterflyParams {
        &self.params
    }

    /// Spot at the shock date for a standard normal draw `z`.
    pub fn spot_at_shock(&self, z: f64) -> f64 {
        let sd = self.params.sigma * self.params.shock_time.sqrt();
        self.params.s0 * (sd * z - 0.5 * sd * sd).exp()
    }

    /// `(E[Y¹|X=x], E[Y²|X=x], 0)` from butterfly prices.
    pub fn conditional_means(&self, x: f64) -> [f64; 3] {
        let p = &self.params;
        let tau = p.residual();
        let base = butterfly_unchecked(tau, x, p);
        [
            base - butterfly_unchecked(tau, (1.0 + p.s_up) * x, p),
            base - butterfly_unchecked(tau, (1.0 + p.s_down) * x, p),
            0.0,
        ]
    }

    /// Regression feature of an outer sample: the standardized log-spot.
    pub fn feature(&self, x: &f64) -> Vec<f64> {
        vec![self.params.standardized(*x)]
    }
}

impl NestedProblem for ButterflyProblem {
    type Outer = f64;

    fn components(&self) -> usize {
        3
    }

    fn sample_outer(&self, rng: &mut StreamRng) -> Result<f64, SampleError> {
        Ok(self.spot_at_shock(StandardNormal.sample(rng)))
    }

    fn sample_inner(&self, x: &f64, rng: &mut StreamRng, out: &mut [f64]) -> Result<(), SampleError> {
        let p = &self.params;
        let sd = p.sigma * p.residual().sqrt();
        let z: f64 = StandardNormal.sample(rng);
        let s_t = x * (sd * z - 0.5 * sd * sd).exp();
        let base = payoff(s_t, p);
        out[0] = base - payoff((1.0 + p.s_up) * s_t, p);
        out[1] = base - payoff((1.0 + p.s_down) * s_t, p);
        out[2] = 0.0;
        Ok(())
    }

    fn weight(&self, _: &f64) -> f64 {
        1.0
    }

    fn exact_conditional_means(&self, x: &f64) -> Option<Vec<f64>> {
        Some(self.conditional_means(*x).to_vec())
    }
}

/// `E[max(E[Y¹|X], E[Y²|X], 0)]` by adaptive quadrature over the standard
/// normal driver of `X`, truncated to `[−8, 8]`.
pub fn reference_value(params: &ButterflyParams, tol: f64) -> Result<f64, ButterflyError> {
    let pb = ButterflyProblem::new(*params)?;
    let v = expect_standard_normal(
        |z| {
            let m = pb.conditional_means(pb.spot_at_shock(z));
            m[0].max(m[1]).max(0.0)
        },
        tol,
    )?;
    Ok(v)
}
