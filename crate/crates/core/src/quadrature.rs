//! Adaptive Gauss–Legendre integration.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error("invalid integration request: {0}")]
    Domain(String),
    #[error("adaptive quadrature did not reach tolerance {tol:e} (error estimate {estimate:e})")]
    NonConvergence { tol: f64, estimate: f64 },
}

/// Gauss–Legendre rule with nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; nodes are Newton-refined roots of `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        s * half
    }
}

// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const MAX_DEPTH: u32 = 40;
const INITIAL_PANELS: usize = 32;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is first cut into uniform panels. Each panel is compared
/// with the sum over its two halves and accepted when the two agree within
/// its share of the tolerance.
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureError> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(QuadratureError::Domain(format!("bounds must be finite with a < b, got [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(QuadratureError::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let rule = GaussLegendre::new(10);
    let width = b - a;
    let mut total = 0.0;
    let h = width / INITIAL_PANELS as f64;
    let mut stack: Vec<(f64, f64, f64, u32)> = (0..INITIAL_PANELS)
        .rev()
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == INITIAL_PANELS { b } else { lo + h };
            (lo, hi, rule.integrate(&f, lo, hi), 0)
        })
        .collect();
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(&f, lo, mid);
        let right = rule.integrate(&f, mid, hi);
        let fine = left + right;
        let err = (fine - coarse).abs();
        let share = tol * (hi - lo) / width;
        if !fine.is_finite() {
            return Err(QuadratureError::Domain(format!("integrand is not finite on [{lo}, {hi}]")));
        }
        if err <= share.max(f64::EPSILON * fine.abs()) {
            total += fine;
        } else if depth >= MAX_DEPTH {
            return Err(QuadratureError::NonConvergence { tol, estimate: err });
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(total)
}

/// Integrates over `[points[0], points[last]]`, treating every interior
/// point as a panel boundary. Features narrower than the node spacing (kinks
/// bounding a thin support, say) are only resolved when listed here.
pub fn integrate_with_breakpoints(f: impl Fn(f64) -> f64, points: &[f64], tol: f64) -> Result<f64, QuadratureError> {
    if points.len() < 2 || points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(QuadratureError::Domain("breakpoints must be strictly increasing, at least two".into()));
    }
    let width = points[points.len() - 1] - points[0];
    points
        .windows(2)
        .map(|w| integrate_adaptive(&f, w[0], w[1], tol * (w[1] - w[0]) / width))
        .sum()
}

/// `E[f(Z)]` for `Z` standard normal, truncated to `[−8, 8]`.
pub fn expect_standard_normal(f: impl Fn(f64) -> f64, tol: f64) -> Result<f64, QuadratureError> {
    let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    integrate_adaptive(|z| f(z) * c * (-0.5 * z * z).exp(), -8.0, 8.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(10);
        for deg in 0..20 {
            let got = rule.integrate(&|x: f64| x.powi(deg), -1.0, 1.0);
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((got - exact).abs() < 1e-14, "degree {deg}: {got} vs {exact}");
        }
        let w: f64 = GaussLegendre::new(7).weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let got = integrate_adaptive(|x: f64| (x - 0.3).abs(), -1.0, 1.0, 1e-12).unwrap();
        let exact = 0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7;
        assert!((got - exact).abs() < 1e-11);
    }

    #[test]
    fn normal_moments() {
        let m0 = expect_standard_normal(|_| 1.0, 1e-13).unwrap();
        let m2 = expect_standard_normal(|z| z * z, 1e-13).unwrap();
        let e = expect_standard_normal(|z| z.exp(), 1e-12).unwrap();
        assert!((m0 - 1.0).abs() < 1e-12);
        assert!((m2 - 1.0).abs() < 1e-12);
        assert!((e - 0.5f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn breakpoints_resolve_thin_support() {
        let f = |x: f64| if (0.7..0.7001).contains(&x) { 1.0 } else { 0.0 };
        let got = integrate_with_breakpoints(f, &[0.0, 0.7, 0.7001, 1.0], 1e-12).unwrap();
        assert!((got - 1e-4).abs() < 1e-12);
        assert!(integrate_with_breakpoints(f, &[0.0, 0.0, 1.0], 1e-12).is_err());
        assert!(integrate_with_breakpoints(f, &[0.0], 1e-12).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(integrate_adaptive(|x| x, 1.0, 0.0, 1e-8).is_err());
        assert!(integrate_adaptive(|x| x, 0.0, 1.0, 0.0).is_err());
        assert!(matches!(
            integrate_adaptive(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, 1e-300),
            Err(QuadratureError::NonConvergence { .. }) | Err(QuadratureError::Domain(_))
        ));
    }
}
