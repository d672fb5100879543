use market_models::MarketParams;
use mlmc_core::rng::OUTER_DRAW;
use mlmc_core::stats::mean_var;
use mlmc_core::{NestedProblem, StreamRng};
use rayon::prelude::*;

use crate::{AlmError, ScrConfig, ScrProblem, ScrReport};

/// Instantaneous move of an initial market quantity right after inception.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bump {
    S0(f64),
    R0(f64),
}

impl Bump {
    pub fn size(&self) -> f64 {
        match *self {
            Bump::S0(d) | Bump::R0(d) => d,
        }
    }

    fn apply(&self, m: &MarketParams) -> MarketParams {
        let mut out = m.clone();
        match *self {
            Bump::S0(d) => out.s0 += d,
            Bump::R0(d) => out.x0 += d,
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityResult {
    /// Nested estimate of `E[SCR^mkt_t]` at base parameters.
    pub base: f64,
    pub bumped: f64,
    /// Finite difference `(bumped − base) / δ`.
    pub derivative: f64,
    /// Standard error of the derivative from the paired scenario differences.
    pub std_error: f64,
}

/// Finite-difference sensitivity of `E[SCR^mkt_t]` to `bump`. Base and bumped
/// nested estimates (`j` outer, `k` inner) share every random draw and the
/// inception portfolio.
pub fn sensitivity(cfg: &ScrConfig, bump: Bump, j: usize, k: usize, seed: u64) -> Result<SensitivityResult, AlmError> {
    let d = bump.size();
    if d == 0.0 || !d.is_finite() {
        return Err(AlmError::Param("bump must be finite and non-zero".into()));
    }
    if j == 0 || k == 0 {
        return Err(AlmError::Param("J and K must be positive".into()));
    }
    let inception = cfg.inception.clone().unwrap_or_else(|| cfg.market.clone());
    let base = ScrProblem::new(ScrConfig {
        inception: Some(inception.clone()),
        ..cfg.clone()
    })?;
    let bumped = ScrProblem::new(ScrConfig {
        market: bump.apply(&cfg.market),
        inception: Some(inception),
        ..cfg.clone()
    })?;
    let rows = (0..j as u64)
        .into_par_iter()
        .map(|s| -> Result<(f64, f64), AlmError> {
            Ok((scenario_mkt(&base, seed, s, k)?, scenario_mkt(&bumped, seed, s, k)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (a, b): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (y - x) / d).collect();
    let (derivative, var) = mean_var(&diffs);
    Ok(SensitivityResult {
        base: mean_var(&a).0,
        bumped: mean_var(&b).0,
        derivative,
        std_error: (var / j as f64).sqrt(),
    })
}

/// Weighted `SCR^mkt` of one outer scenario from `k` inner draws.
fn scenario_mkt(pb: &ScrProblem, seed: u64, scenario: u64, k: usize) -> Result<f64, AlmError> {
    let outer = pb.outer(&mut StreamRng::from_parts(seed, 0, scenario, OUTER_DRAW))?;
    let mut sums = [0.0; 4];
    for d in 0..k as u64 {
        let v = pb.inner_values(&outer, &mut StreamRng::from_parts(seed, 0, scenario, d))?;
        for (s, y) in sums.iter_mut().zip([v[0] - v[1], v[0] - v[2], v[0] - v[3], 0.0]) {
            *s += y;
        }
    }
    let means: Vec<f64> = sums.iter().map(|s| s / k as f64).collect();
    Ok(pb.weight(&outer) * ScrReport::from_means(&means).scr_mkt)
}
