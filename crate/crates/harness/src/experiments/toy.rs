use mlmc_core::lsmc::{lsmc_estimate, HypercubePartition, PartitionSpec};
use mlmc_core::{
    antithetic_mlmc_estimate, level_diagnostics, mlmc_estimate, nested_estimate, schedule_antithetic, schedule_plain,
    Aggregator, EstimatorConfig,
};
use toy_butterfly::{reference_value, ButterflyProblem};

use super::{rmse_row, RMSE_COLUMNS};
use crate::config::{Config, DiagnosticsSection};
use crate::table::Table;
use crate::HarnessError;

fn problem(cfg: &Config) -> Result<(ButterflyProblem, f64), HarnessError> {
    let p = cfg.toy.params();
    let pb = ButterflyProblem::new(p).map_err(|e| HarnessError::Config(format!("toy: {e}")))?;
    let reference =
        reference_value(&p, cfg.toy.reference_tolerance).map_err(|e| HarnessError::Numerical(e.to_string()))?;
    Ok((pb, reference))
}

fn diagnostics(cfg: &Config, section: &DiagnosticsSection) -> Result<Vec<mlmc_core::LevelDiagnostic>, HarnessError> {
    if section.k.is_empty() || section.j == 0 {
        return Err(HarnessError::Config("diagnostics need a non-empty k list and positive j".into()));
    }
    let (pb, reference) = problem(cfg)?;
    Ok(level_diagnostics(&pb, &Aggregator::max(), &section.k, section.j, reference, cfg.seed)?)
}

/// Bias of the nested estimator against the inner sample size.
pub fn toy_bias(cfg: &Config) -> Result<Table, HarnessError> {
    let (_, reference) = problem(cfg)?;
    let mut t = Table::new(&["k", "j", "bias", "bias_std_error", "estimate", "std_error", "reference"]);
    for d in diagnostics(cfg, &cfg.toy_bias)? {
        t.push(vec![
            d.k.into(),
            d.j.into(),
            d.bias_proxy.into(),
            d.bias_std_error.into(),
            d.estimate.into(),
            d.std_error.into(),
            reference.into(),
        ]);
    }
    Ok(t)
}

/// Plain and antithetic level variances against the inner sample size.
pub fn toy_levelvar(cfg: &Config) -> Result<Table, HarnessError> {
    let mut t = Table::new(&["k", "j", "var_plain", "var_antithetic"]);
    for d in diagnostics(cfg, &cfg.toy_levelvar)? {
        t.push(vec![d.k.into(), d.j.into(), d.var_plain.into(), d.var_antithetic.into()]);
    }
    Ok(t)
}

/// Empirical RMSE of the multilevel and nested estimators over a grid of
/// target accuracies.
pub fn toy_rmse(cfg: &Config) -> Result<Table, HarnessError> {
    let s = &cfg.toy_rmse;
    let (pb, reference) = problem(cfg)?;
    let agg = Aggregator::max();
    let mut t = Table::new(&RMSE_COLUMNS);
    for &eta in &s.etas {
        for &eps in &s.epsilons {
            let ec = EstimatorConfig::new(eps, eta, s.k0).map_err(|e| HarnessError::Config(format!("toy_rmse: {e}")))?;
            let sched = schedule_antithetic(&ec)?;
            t.push(rmse_row("mlmc_antithetic", Some(eta), Some(eps), None, reference, cfg, |seed| {
                let r = antithetic_mlmc_estimate(&pb, std::slice::from_ref(&agg), &sched, seed)?;
                Ok((r[0].value, r[0].total_cost))
            })?);
            if s.plain {
                let sched = schedule_plain(&ec)?;
                t.push(rmse_row("mlmc", Some(eta), Some(eps), None, reference, cfg, |seed| {
                    let r = mlmc_estimate(&pb, &agg, &sched, seed)?;
                    Ok((r.value, r.total_cost))
                })?);
            }
            if s.nested {
                let j = (eps.powi(-2)).ceil() as usize;
                let k = eps.powf(-2.0 / (1.0 + eta)).ceil() as usize;
                t.push(rmse_row("nested", Some(eta), Some(eps), None, reference, cfg, |seed| {
                    let r = nested_estimate(&pb, &agg, j, k, seed)?;
                    Ok((r.value, r.total_cost))
                })?);
            }
        }
    }
    Ok(t)
}

/// Empirical RMSE of the regression estimator with `N_r ∝ J^{1/3}` cells.
pub fn toy_lsmc(cfg: &Config) -> Result<Table, HarnessError> {
    let s = &cfg.toy_lsmc;
    if !(s.n_r_scale > 0.0 && s.bound > 0.0) {
        return Err(HarnessError::Config("toy_lsmc: n_r_scale and bound must be positive".into()));
    }
    let (pb, reference) = problem(cfg)?;
    let agg = Aggregator::max();
    let feature = |x: &f64| pb.feature(x);
    let mut t = Table::new(&RMSE_COLUMNS);
    for &j in &s.j {
        let n_r = ((s.n_r_scale * (j as f64).cbrt()).round() as usize).max(1);
        let part = HypercubePartition::new(n_r, vec![(-s.bound, s.bound)])
            .map_err(|e| HarnessError::Config(format!("toy_lsmc: {e}")))?;
        let spec = PartitionSpec::Fixed(part);
        t.push(rmse_row("lsmc", None, None, Some(n_r), reference, cfg, |seed| {
            let r = lsmc_estimate(&pb, &agg, &feature, j, &spec, seed)?;
            Ok((r.value, r.total_cost))
        })?);
    }
    Ok(t)
}
