use crate::AlmError;

/// Management and liability parameters of the savings portfolio.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmParams {
    /// Target equity weight after each reallocation.
    pub w_s: f64,
    /// Participation rate in financial income.
    pub pi_pr: f64,
    /// Minimum guaranteed rate.
    pub r_g: f64,
    /// Deterministic annual exit rate.
    pub p_exit: f64,
    pub dsr_max: f64,
    /// Spread at or below which dynamic surrenders are maximal.
    pub alpha: f64,
    /// Spread at or above which there are no dynamic surrenders.
    pub beta: f64,
    /// Fraction of the profit-sharing reserve released each year.
    pub rho_bar: f64,
    /// Length of the bond ladder (years).
    pub n: usize,
    /// Projection horizon (years).
    pub horizon: usize,
    /// Initial mathematical reserve.
    pub mr0: f64,
}

impl Default for AlmParams {
    fn default() -> Self {
        Self {
            w_s: 0.05,
            pi_pr: 0.9,
            r_g: 0.015,
            p_exit: 0.05,
            dsr_max: 0.3,
            alpha: -0.05,
            beta: -0.01,
            rho_bar: 0.5,
            n: 20,
            horizon: 30,
            mr0: 1.0,
        }
    }
}

impl AlmParams {
    pub fn validate(&self) -> Result<(), AlmError> {
        let reals = [
            self.w_s, self.pi_pr, self.r_g, self.p_exit, self.dsr_max, self.alpha, self.beta, self.rho_bar, self.mr0,
        ];
        if reals.iter().any(|v| !v.is_finite()) {
            return Err(AlmError::Param("parameters must be finite".into()));
        }
        let unit = |v: f64, name: &str| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(AlmError::Param(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit(self.w_s, "w_s")?;
        unit(self.pi_pr, "pi_pr")?;
        unit(self.p_exit, "p_exit")?;
        unit(self.dsr_max, "dsr_max")?;
        unit(self.rho_bar, "rho_bar")?;
        if !(self.alpha < self.beta && self.beta <= 0.0) {
            return Err(AlmError::Param(format!(
                "need alpha < beta <= 0, got alpha={} beta={}",
                self.alpha, self.beta
            )));
        }
        if self.n == 0 || self.horizon == 0 {
            return Err(AlmError::Param("ladder length and horizon must be positive".into()));
        }
        if !(self.mr0 > 0.0) {
            return Err(AlmError::Param("initial reserve must be positive".into()));
        }
        Ok(())
    }

    /// Dynamic surrender rate for the spread `delta` between the credited
    /// and the competitor rate.
    pub fn dsr(&self, delta: f64) -> f64 {
        if delta <= self.alpha {
            self.dsr_max
        } else if delta < self.beta {
            self.dsr_max * (self.beta - delta) / (self.beta - self.alpha)
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surrender_curve() {
        let p = AlmParams::default();
        assert_eq!(p.dsr(-0.06), 0.3);
        assert_eq!(p.dsr(-0.05), 0.3);
        assert_eq!(p.dsr(0.0), 0.0);
        assert_eq!(p.dsr(-0.01), 0.0);
        assert!((p.dsr(-0.03) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        AlmParams::default().validate().unwrap();
        let d = AlmParams::default();
        for bad in [
            AlmParams { w_s: 1.2, ..d.clone() },
            AlmParams { alpha: -0.01, beta: -0.05, ..d.clone() },
            AlmParams { beta: 0.01, ..d.clone() },
            AlmParams { n: 0, ..d.clone() },
            AlmParams { mr0: 0.0, ..d.clone() },
            AlmParams { pi_pr: f64::NAN, ..d.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }
}
