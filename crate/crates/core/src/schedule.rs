//! Level schedules for the multilevel estimators.
//!
//! Inner sample sizes double from level to level, `K_l = K₀·2ˡ`. The number
//! of levels and the replications per level follow the asymptotically
//! optimal tuning for a target RMSE `ε` and regularity parameter `η`.

use crate::error::EstimatorError;

/// Target accuracy and tuning parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Target RMSE scale, in (0, 1).
    pub epsilon: f64,
    /// Regularity parameter in (0, 1].
    pub eta: f64,
    /// Inner sample size at level 0; even and at least 2.
    pub k0: usize,
}

impl EstimatorConfig {
    pub fn new(epsilon: f64, eta: f64, k0: usize) -> Result<Self, EstimatorError> {
        let cfg = Self { epsilon, eta, k0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(EstimatorError::Config(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(EstimatorError::Config(format!(
                "eta must lie in (0, 1], got {}",
                self.eta
            )));
        }
        if self.k0 < 2 || self.k0 % 2 != 0 {
            return Err(EstimatorError::Config(format!(
                "K0 must be even and at least 2, got {}",
                self.k0
            )));
        }
        Ok(())
    }
}

/// Replication plan `(L, K_l, J_l)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSchedule {
    pub k: Vec<usize>,
    pub j: Vec<usize>,
}

impl LevelSchedule {
    /// Builds a schedule with `K_l = k0·2ˡ` for the given replications.
    pub fn from_replications(k0: usize, j: Vec<usize>) -> Result<Self, EstimatorError> {
        if j.is_empty() {
            return Err(EstimatorError::Schedule("at least one level is required".into()));
        }
        let k = (0..j.len()).map(|l| k0 << l).collect();
        let s = Self { k, j };
        s.validate()?;
        Ok(s)
    }

    /// Index of the finest level.
    pub fn max_level(&self) -> usize {
        self.k.len() - 1
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        if self.k.is_empty() || self.k.len() != self.j.len() {
            return Err(EstimatorError::Schedule(format!(
                "K and J must be non-empty and of equal length ({} vs {})",
                self.k.len(),
                self.j.len()
            )));
        }
        if self.k[0] == 0 {
            return Err(EstimatorError::Schedule("K0 must be positive".into()));
        }
        for (l, &kl) in self.k.iter().enumerate() {
            if kl != self.k[0] << l {
                return Err(EstimatorError::Schedule(format!(
                    "K must double per level: K_{l} = {kl}, expected {}",
                    self.k[0] << l
                )));
            }
        }
        if let Some(l) = self.j.iter().position(|&j| j == 0) {
            return Err(EstimatorError::Schedule(format!("J_{l} must be at least 1")));
        }
        Ok(())
    }

    /// `Σ_l J_l K_l`, the number of inner draws the schedule consumes.
    pub fn inner_draws(&self) -> u64 {
        self.k
            .iter()
            .zip(&self.j)
            .map(|(&k, &j)| k as u64 * j as u64)
            .sum()
    }
}

// Ceiling that ignores round-off just above an integer, so that e.g.
// 4.000000000000001 yields 4.
fn ceil_tol(x: f64) -> f64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}

fn level_count(cfg: &EstimatorConfig) -> usize {
    let log2_inv_eps = -cfg.epsilon.log2();
    ceil_tol(2.0 / (1.0 + cfg.eta) * log2_inv_eps).max(0.0) as usize
}

fn doubling(k0: usize, levels: usize) -> Vec<usize> {
    (0..=levels).map(|l| k0 << l).collect()
}

/// Schedule of the plain multilevel estimator:
/// `L = ⌈2/(1+η)·|log ε|/log 2⌉`, `J₀ = 2^⌈(2|log ε| + |log|log ε||)/log 2⌉`,
/// `J_l = max(1, ⌊J₀ 2⁻ˡ⌋)`.
pub fn schedule_plain(cfg: &EstimatorConfig) -> Result<LevelSchedule, EstimatorError> {
    cfg.validate()?;
    let levels = level_count(cfg);
    let abs_log = -cfg.epsilon.ln();
    let exp0 = ceil_tol((2.0 * abs_log + abs_log.ln().abs()) / std::f64::consts::LN_2);
    let j0 = 2f64.powf(exp0);
    let j = (0..=levels)
        .map(|l| (j0 * 2f64.powi(-(l as i32))).floor().max(1.0) as usize)
        .collect();
    Ok(LevelSchedule {
        k: doubling(cfg.k0, levels),
        j,
    })
}

/// Schedule of the antithetic multilevel estimator:
/// same `L`, `J₀ = 2^⌈2|log ε|/log 2⌉`, `J_l = ⌈J₀ 2^{-(1+η/4)l}⌉`.
pub fn schedule_antithetic(cfg: &EstimatorConfig) -> Result<LevelSchedule, EstimatorError> {
    cfg.validate()?;
    let levels = level_count(cfg);
    let j0 = 2f64.powf(ceil_tol(-2.0 * cfg.epsilon.log2()));
    let rate = 1.0 + cfg.eta / 4.0;
    let j = (0..=levels)
        .map(|l| ceil_tol(j0 * 2f64.powf(-rate * l as f64)).max(1.0) as usize)
        .collect();
    Ok(LevelSchedule {
        k: doubling(cfg.k0, levels),
        j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eps: f64, eta: f64) -> EstimatorConfig {
        EstimatorConfig::new(eps, eta, 2).unwrap()
    }

    #[test]
    fn plain_schedule_sixteenth() {
        let s = schedule_plain(&cfg(1.0 / 16.0, 1.0)).unwrap();
        assert_eq!(s.max_level(), 4);
        assert_eq!(s.j, vec![1024, 512, 256, 128, 64]);
        assert_eq!(s.k, vec![2, 4, 8, 16, 32]);
    }

    #[test]
    fn plain_schedule_half_eta() {
        assert_eq!(schedule_plain(&cfg(1.0 / 16.0, 0.5)).unwrap().max_level(), 6);
    }

    #[test]
    fn antithetic_schedule_sixteenth() {
        let s = schedule_antithetic(&cfg(1.0 / 16.0, 1.0)).unwrap();
        assert_eq!(s.max_level(), 4);
        assert_eq!(s.j, vec![256, 108, 46, 20, 8]);
        assert_eq!(schedule_antithetic(&cfg(1.0 / 16.0, 0.5)).unwrap().max_level(), 6);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(EstimatorConfig::new(1.0, 1.0, 2).is_err());
        assert!(EstimatorConfig::new(1.5, 1.0, 2).is_err());
        assert!(EstimatorConfig::new(0.0, 1.0, 2).is_err());
        assert!(EstimatorConfig::new(0.1, 0.0, 2).is_err());
        assert!(EstimatorConfig::new(0.1, 1.1, 2).is_err());
        assert!(EstimatorConfig::new(0.1, 1.0, 3).is_err());
        assert!(EstimatorConfig::new(0.1, 1.0, 0).is_err());
        let bad = EstimatorConfig {
            epsilon: 2.0,
            eta: 1.0,
            k0: 2,
        };
        assert!(matches!(schedule_plain(&bad), Err(EstimatorError::Config(_))));
        assert!(matches!(schedule_antithetic(&bad), Err(EstimatorError::Config(_))));
    }

    #[test]
    fn doubling_and_positive_replications() {
        for &eps in &[0.3, 0.1, 1.0 / 32.0, 1e-3] {
            for &eta in &[0.25, 0.5, 0.75, 1.0] {
                for &k0 in &[2usize, 4, 10] {
                    let c = EstimatorConfig::new(eps, eta, k0).unwrap();
                    for s in [schedule_plain(&c).unwrap(), schedule_antithetic(&c).unwrap()] {
                        s.validate().unwrap();
                        for (l, &k) in s.k.iter().enumerate() {
                            assert_eq!(k, k0 * (1 << l));
                        }
                        assert!(s.j.iter().all(|&j| j >= 1));
                    }
                }
            }
        }
    }

    #[test]
    fn validate_rejects_broken_doubling() {
        let s = LevelSchedule {
            k: vec![2, 4, 6],
            j: vec![4, 2, 1],
        };
        assert!(s.validate().is_err());
        let s = LevelSchedule {
            k: vec![2, 4],
            j: vec![4, 0],
        };
        assert!(s.validate().is_err());
        let s = LevelSchedule::from_replications(4, vec![8, 4, 2]).unwrap();
        assert_eq!(s.k, vec![4, 8, 16]);
        assert_eq!(s.inner_draws(), 32 + 32 + 32);
    }
}
