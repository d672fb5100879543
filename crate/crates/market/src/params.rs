use crate::MarketError;

/// Deterministic shift `φ`, constant on each year `[j, j+1)` and equal to
/// `tail` beyond the stored values.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftCurve {
    values: Vec<f64>,
    tail: f64,
}

impl Default for ShiftCurve {
    fn default() -> Self {
        Self::zero()
    }
}

impl ShiftCurve {
    pub fn zero() -> Self {
        Self {
            values: Vec::new(),
            tail: 0.0,
        }
    }

    pub fn new(values: Vec<f64>, tail: f64) -> Result<Self, MarketError> {
        if values.iter().chain(std::iter::once(&tail)).any(|v| !v.is_finite()) {
            return Err(MarketError::Param("shift values must be finite".into()));
        }
        Ok(Self { values, tail })
    }

    pub fn flat(value: f64) -> Self {
        Self {
            values: Vec::new(),
            tail: value,
        }
    }

    /// `φ` on year `[j, j+1)`, which is also `∫_j^{j+1} φ`.
    pub fn value(&self, year: usize) -> f64 {
        self.values.get(year).copied().unwrap_or(self.tail)
    }

    /// `∫_from^to φ(u) du` for integer years.
    pub fn integral(&self, from: usize, to: usize) -> f64 {
        (from..to).map(|j| self.value(j)).sum()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// This curve plus `delta` applied from year `start` on: year `start + j`
    /// receives `delta.value(j)`.
    pub fn with_added_from(&self, start: usize, delta: &ShiftCurve) -> ShiftCurve {
        let len = self.values.len().max(start + delta.values.len());
        let values = (0..len)
            .map(|j| self.value(j) + if j >= start { delta.value(j - start) } else { 0.0 })
            .collect();
        ShiftCurve {
            values,
            tail: self.tail + delta.tail,
        }
    }
}

/// Parameters of the stock / short-rate model and of the change of measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketParams {
    pub s0: f64,
    pub sigma_s: f64,
    pub x0: f64,
    /// Mean-reversion speed per year.
    pub k: f64,
    pub theta: f64,
    pub sigma_r: f64,
    /// Correlation between the stock and the rate factor.
    pub gamma: f64,
    pub lambda_w: f64,
    pub lambda_z: f64,
    pub shift: ShiftCurve,
}

impl Default for MarketParams {
    fn default() -> Self {
        Self {
            s0: 1.0,
            sigma_s: 0.1,
            x0: 0.02,
            k: 0.2,
            theta: 0.02,
            sigma_r: 0.01,
            gamma: 0.0,
            lambda_w: 0.0,
            lambda_z: 0.0,
            shift: ShiftCurve::zero(),
        }
    }
}

impl MarketParams {
    pub fn validate(&self) -> Result<(), MarketError> {
        let finite = [
            self.s0,
            self.sigma_s,
            self.x0,
            self.k,
            self.theta,
            self.sigma_r,
            self.gamma,
            self.lambda_w,
            self.lambda_z,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(MarketError::Param("all parameters must be finite".into()));
        }
        if !(self.s0 > 0.0) {
            return Err(MarketError::Param(format!("S0 must be positive, got {}", self.s0)));
        }
        if !(self.k > 0.0) {
            return Err(MarketError::Param(format!("k must be positive, got {}", self.k)));
        }
        if self.sigma_s < 0.0 || self.sigma_r < 0.0 {
            return Err(MarketError::Param("volatilities must be non-negative".into()));
        }
        if self.gamma.abs() > 1.0 {
            return Err(MarketError::Param(format!("|γ| must be at most 1, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Short rate at time 0.
    pub fn r0(&self) -> f64 {
        self.x0 + self.shift.value(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_lookup_and_integral() {
        let s = ShiftCurve::new(vec![0.01, 0.02], 0.005).unwrap();
        assert_eq!(s.value(0), 0.01);
        assert_eq!(s.value(1), 0.02);
        assert_eq!(s.value(7), 0.005);
        assert!((s.integral(0, 4) - 0.04).abs() < 1e-15);
        assert_eq!(s.integral(3, 3), 0.0);
        assert!(ShiftCurve::new(vec![f64::NAN], 0.0).is_err());
    }

    #[test]
    fn shift_addition_from_a_date() {
        let base = ShiftCurve::new(vec![0.01, 0.02, 0.03], 0.04).unwrap();
        let delta = ShiftCurve::new(vec![1.0, 2.0], 3.0).unwrap();
        let s = base.with_added_from(1, &delta);
        assert_eq!(s.value(0), 0.01);
        assert_eq!(s.value(1), 1.02);
        assert_eq!(s.value(2), 2.03);
        assert_eq!(s.value(3), 3.04);
        assert_eq!(s.value(50), 3.04);
        assert_eq!(base.with_added_from(0, &ShiftCurve::zero()), ShiftCurve::new(vec![0.01, 0.02, 0.03], 0.04).unwrap());
    }

    #[test]
    fn parameter_validation() {
        let p = MarketParams::default();
        p.validate().unwrap();
        assert_eq!(p.r0(), 0.02);
        for bad in [
            MarketParams { k: 0.0, ..p.clone() },
            MarketParams { gamma: 1.5, ..p.clone() },
            MarketParams { sigma_s: -0.1, ..p.clone() },
            MarketParams { s0: 0.0, ..p.clone() },
            MarketParams { theta: f64::INFINITY, ..p.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
