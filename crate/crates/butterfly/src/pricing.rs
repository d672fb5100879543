use libm::erfc;

use crate::{ButterflyError, ButterflyParams};

/// Standard normal cumulative distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub(crate) fn call_unchecked(tau: f64, s: f64, k: f64, sigma: f64) -> f64 {
    if tau == 0.0 {
        return (s - k).max(0.0);
    }
    let sd = sigma * tau.sqrt();
    let d1 = (s / k).ln() / sd + 0.5 * sd;
    s * norm_cdf(d1) - k * norm_cdf(d1 - sd)
}

/// Zero-rate Black–Scholes call price with time to maturity `tau`.
pub fn call_bs(tau: f64, s: f64, k: f64, sigma: f64) -> Result<f64, ButterflyError> {
    if !(tau >= 0.0 && s > 0.0 && k > 0.0 && sigma > 0.0) || !(tau.is_finite() && s.is_finite() && k.is_finite()) {
        return Err(ButterflyError::Domain(format!(
            "call needs τ ≥ 0, s > 0, K > 0, σ > 0; got τ={tau}, s={s}, K={k}, σ={sigma}"
        )));
    }
    Ok(call_unchecked(tau, s, k, sigma))
}

pub(crate) fn butterfly_unchecked(tau: f64, s: f64, p: &ButterflyParams) -> f64 {
    call_unchecked(tau, s, p.k1, p.sigma) + call_unchecked(tau, s, p.k2, p.sigma)
        - 2.0 * call_unchecked(tau, s, p.middle_strike(), p.sigma)
}

/// `E[ψ(S_{t+τ}) | S_t = s]`, the price of the butterfly `τ` years before
/// maturity.
pub fn butterfly_price(tau: f64, s: f64, params: &ButterflyParams) -> Result<f64, ButterflyError> {
    params.validate()?;
    call_bs(tau, s, params.k1, params.sigma)?;
    Ok(butterfly_unchecked(tau, s, params))
}

/// Butterfly payoff `(s−K1)⁺ + (s−K2)⁺ − 2(s−(K1+K2)/2)⁺`.
pub fn payoff(s: f64, params: &ButterflyParams) -> f64 {
    (s - params.k1).max(0.0) + (s - params.k2).max(0.0) - 2.0 * (s - params.middle_strike()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_values() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((norm_cdf(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((norm_cdf(-1.0) + norm_cdf(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn call_limits() {
        assert_eq!(call_bs(0.0, 120.0, 100.0, 0.3).unwrap(), 20.0);
        assert_eq!(call_bs(0.0, 80.0, 100.0, 0.3).unwrap(), 0.0);
        assert!((call_bs(1.0, 100.0, 1e-12, 0.3).unwrap() - 100.0).abs() < 1e-9);
        assert!((call_bs(1e-14, 120.0, 100.0, 0.3).unwrap() - 20.0).abs() < 1e-9);
        assert!(call_bs(-1.0, 100.0, 100.0, 0.3).is_err());
        assert!(call_bs(1.0, 0.0, 100.0, 0.3).is_err());
        assert!(call_bs(1.0, 100.0, 100.0, 0.0).is_err());
    }

    #[test]
    fn payoff_at_tau_zero() {
        let p = ButterflyParams::default();
        assert_eq!(butterfly_price(0.0, 100.0, &p).unwrap(), 50.0);
        assert_eq!(butterfly_price(0.0, 150.0, &p).unwrap(), 0.0);
        assert_eq!(butterfly_price(0.0, 170.0, &p).unwrap(), 0.0);
        assert_eq!(butterfly_price(0.0, 40.0, &p).unwrap(), 0.0);
        assert_eq!(payoff(75.0, &p), 25.0);
    }
}
