use alm_engine::{
    risk_factors, scr_aggregators, sensitivity, Bump, OuterState, ScrConfig, ScrProblem, RISK_FACTOR_NAMES,
};
use mlmc_core::lsmc::{forward_select, lsmc_estimate, nested_targets, Matrix, PartitionSpec};
use mlmc_core::{
    antithetic_mlmc_estimate, nested_estimate, schedule_antithetic, Aggregator, EstimatorConfig, EstimatorReport,
    StreamKey, StreamRng,
};

use super::{rmse_row, RMSE_COLUMNS};
use crate::config::{module_index, Config};
use crate::table::{Cell, Table};
use crate::HarnessError;

fn aggregator(name: &str) -> Result<Aggregator, HarnessError> {
    Ok(scr_aggregators().swap_remove(module_index(name)?))
}

fn schedule(eps: f64, eta: f64, k0: usize, section: &str) -> Result<mlmc_core::LevelSchedule, HarnessError> {
    let ec = EstimatorConfig::new(eps, eta, k0).map_err(|e| HarnessError::Config(format!("{section}: {e}")))?;
    Ok(schedule_antithetic(&ec)?)
}

fn problem(cfg: ScrConfig, section: &str) -> Result<ScrProblem, HarnessError> {
    ScrProblem::new(cfg).map_err(|e| HarnessError::Config(format!("{section}: {e}")))
}

/// Outer scenarios `0..j` on the level-0 outer streams of `seed`.
fn outer_scenarios(pb: &ScrProblem, j: usize, seed: u64) -> Result<Vec<OuterState>, HarnessError> {
    (0..j as u64)
        .map(|s| Ok(pb.outer(&mut StreamRng::new(StreamKey::outer(seed, 0, s)))?))
        .collect()
}

fn factor_rows(scenarios: &[OuterState]) -> Result<Matrix, HarnessError> {
    let rows: Vec<Vec<f64>> = scenarios.iter().map(|o| risk_factors(&o.sheet, &o.state).to_vec()).collect();
    Ok(Matrix::from_rows(&rows)?)
}

/// Nested reference value with `Γ^{2/3}` outer and `Γ^{1/3}` inner draws.
fn reference(pb: &ScrProblem, agg: &Aggregator, cfg: &Config) -> Result<EstimatorReport, HarnessError> {
    let gamma = cfg.reference_budget;
    let j = gamma.powf(2.0 / 3.0).round().max(1.0) as usize;
    let k = gamma.cbrt().round().max(1.0) as usize;
    Ok(nested_estimate(pb, agg, j, k, cfg.batch_seed(usize::MAX))?)
}

/// Forward selection of risk factors explaining per-scenario nested SCR values.
pub fn alm_select(cfg: &Config) -> Result<Table, HarnessError> {
    let s = &cfg.alm_select;
    if s.j_v == 0 || s.k == 0 || s.n_r == 0 || s.max_vars == 0 || s.max_vars > RISK_FACTOR_NAMES.len() {
        return Err(HarnessError::Config("alm_select: j_v, k, n_r and max_vars must be positive, max_vars ≤ 12".into()));
    }
    let pb = problem(cfg.scr_config(s.t)?, "alm_select")?;
    let agg = aggregator(&s.module)?;
    let selection = select(&pb, &agg, cfg)?;
    let mut t = Table::new(&["step", "feature", "name", "rmse"]);
    for (i, (&f, &r)) in selection.ordered_features.iter().zip(&selection.rmse_path).enumerate() {
        t.push(vec![(i + 1).into(), f.into(), RISK_FACTOR_NAMES[f].into(), r.into()]);
    }
    Ok(t)
}

fn select(pb: &ScrProblem, agg: &Aggregator, cfg: &Config) -> Result<mlmc_core::lsmc::SelectionResult, HarnessError> {
    let s = &cfg.alm_select;
    let scenarios = outer_scenarios(pb, s.j_v, cfg.seed)?;
    let targets = nested_targets(pb, agg, &scenarios, s.k, cfg.seed)?;
    Ok(forward_select(&factor_rows(&scenarios)?, &targets, s.n_r, s.max_vars)?)
}

/// RMSE of the antithetic multilevel estimator and of regression estimators
/// on the first one, two, … selected risk factors.
pub fn alm_rmse(cfg: &Config) -> Result<Table, HarnessError> {
    let s = &cfg.alm_rmse;
    let pb = problem(cfg.scr_config(s.t)?, "alm_rmse")?;
    let agg = aggregator(&s.module)?;
    let features = match &s.features {
        Some(f) => {
            if f.is_empty() || f.iter().any(|&i| i >= RISK_FACTOR_NAMES.len()) {
                return Err(HarnessError::Config("alm_rmse.features: indices must lie in 0..12".into()));
            }
            f.clone()
        }
        None => select(&pb, &agg, cfg)?.ordered_features,
    };
    if s.n_r.len() < features.len() || s.n_r.contains(&0) {
        return Err(HarnessError::Config("alm_rmse.n_r: one positive entry per regressor count".into()));
    }
    let reference = reference(&pb, &agg, cfg)?.value;
    let mut t = Table::new(&RMSE_COLUMNS);
    for &eps in &s.epsilons {
        let sched = schedule(eps, s.eta, s.k0, "alm_rmse")?;
        t.push(rmse_row("mlmc_antithetic", Some(s.eta), Some(eps), None, reference, cfg, |seed| {
            let r = antithetic_mlmc_estimate(&pb, std::slice::from_ref(&agg), &sched, seed)?;
            Ok((r[0].value, r[0].total_cost))
        })?);
    }
    for d in 1..=features.len() {
        let cols = &features[..d];
        let feature = |o: &OuterState| {
            let f = risk_factors(&o.sheet, &o.state);
            cols.iter().map(|&i| f[i]).collect::<Vec<f64>>()
        };
        let label = format!("lsmc_{d}");
        let spec = PartitionSpec::Empirical { n_r: s.n_r[d - 1] };
        for &j in &s.lsmc_j {
            t.push(rmse_row(&label, None, None, Some(s.n_r[d - 1]), reference, cfg, |seed| {
                let r = lsmc_estimate(&pb, &agg, &feature, j, &spec, seed)?;
                Ok((r.value, r.total_cost))
            })?);
        }
    }
    Ok(t)
}

/// RMSE of the antithetic multilevel estimator for each η, all against the
/// same reference.
pub fn alm_eta(cfg: &Config) -> Result<Table, HarnessError> {
    let s = &cfg.alm_eta;
    let pb = problem(cfg.scr_config(s.t)?, "alm_eta")?;
    let agg = aggregator(&s.module)?;
    let reference = reference(&pb, &agg, cfg)?.value;
    let mut t = Table::new(&RMSE_COLUMNS);
    for &eta in &s.etas {
        for &eps in &s.epsilons {
            let sched = schedule(eps, eta, s.k0, "alm_eta")?;
            t.push(rmse_row("mlmc_antithetic", Some(eta), Some(eps), None, reference, cfg, |seed| {
                let r = antithetic_mlmc_estimate(&pb, std::slice::from_ref(&agg), &sched, seed)?;
                Ok((r[0].value, r[0].total_cost))
            })?);
        }
    }
    Ok(t)
}

const MODULE_COLUMNS: [&str; 10] = [
    "scr_int",
    "scr_up",
    "scr_down",
    "scr_eq",
    "scr_mkt",
    "scr_int_std_error",
    "scr_up_std_error",
    "scr_down_std_error",
    "scr_eq_std_error",
    "scr_mkt_std_error",
];

/// All SCR modules from one antithetic multilevel run.
fn module_cells(pb: &ScrProblem, cfg: &Config) -> Result<(f64, Vec<Cell>), HarnessError> {
    let sched = schedule_antithetic(&cfg.estimator.config()?)?;
    let reports = antithetic_mlmc_estimate(pb, &scr_aggregators(), &sched, cfg.seed)?;
    let mut cells: Vec<Cell> = reports.iter().map(|r| r.value.into()).collect();
    cells.extend(reports.iter().map(|r| r.std_error.into()));
    Ok((reports[0].total_cost, cells))
}

fn with_columns(prefix: &[&'static str]) -> Table {
    let mut cols = prefix.to_vec();
    cols.push("budget");
    cols.extend(MODULE_COLUMNS);
    Table::new(&cols)
}

/// Expected SCR modules over a grid of equity weights and dates. Every grid
/// point uses the same seed.
pub fn alm_frontier(cfg: &Config) -> Result<Table, HarnessError> {
    let s = &cfg.alm_frontier;
    let mut t = with_columns(&["t", "w_s"]);
    for &date in &s.times {
        for &w in &s.w_s {
            let mut sc = cfg.scr_config(date)?;
            sc.alm.w_s = w;
            let pb = problem(sc, "alm_frontier")?;
            let (budget, cells) = module_cells(&pb, cfg)?;
            let mut row = vec![date.into(), w.into(), budget.into()];
            row.extend(cells);
            t.push(row);
        }
    }
    Ok(t)
}

/// Finite-difference sensitivities of the expected market SCR.
pub fn alm_sensitivity(cfg: &Config) -> Result<Table, HarnessError> {
    let s = &cfg.alm_sensitivity;
    let mut sc = cfg.scr_config(s.t)?;
    sc.alm.w_s = s.w_s;
    problem(sc.clone(), "alm_sensitivity")?;
    let mut t = Table::new(&["bump", "delta", "j", "k", "base", "bumped", "derivative", "std_error"]);
    for (name, bump) in [("s0", Bump::S0(s.d_s0)), ("r0", Bump::R0(s.d_r0))] {
        let r = sensitivity(&sc, bump, s.j, s.k, cfg.seed)
            .map_err(|e| HarnessError::Config(format!("alm_sensitivity: {e}")))?;
        t.push(vec![
            name.into(),
            bump.size().into(),
            s.j.into(),
            s.k.into(),
            r.base.into(),
            r.bumped.into(),
            r.derivative.into(),
            r.std_error.into(),
        ]);
    }
    Ok(t)
}

/// Real-world expected SCR modules against the date, sweeping one risk
/// premium at a time.
pub fn alm_premia(cfg: &Config) -> Result<Table, HarnessError> {
    let s = &cfg.alm_premia;
    let mut t = with_columns(&["series", "lambda_w", "lambda_z", "t"]);
    let sweeps = [("lambda_z", &s.lambda_z), ("lambda_w", &s.lambda_w)];
    for (series, values) in sweeps {
        for &lambda in values.iter() {
            for &date in &s.times {
                let mut sc = cfg.scr_config(date)?;
                sc.outer_measure = s.outer_measure.into();
                match series {
                    "lambda_z" => sc.market.lambda_z = lambda,
                    _ => sc.market.lambda_w = lambda,
                }
                let (lw, lz) = (sc.market.lambda_w, sc.market.lambda_z);
                let pb = problem(sc, "alm_premia")?;
                let (budget, cells) = module_cells(&pb, cfg)?;
                let mut row = vec![series.into(), lw.into(), lz.into(), date.into(), budget.into()];
                row.extend(cells);
                t.push(row);
            }
        }
    }
    Ok(t)
}
