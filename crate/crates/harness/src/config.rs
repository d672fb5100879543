//! Run configuration: a TOML file with one table per parameter block and one
//! per experiment. Every key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use alm_engine::{AlmParams, OuterMeasure, ScrConfig, ShockSpec, SCR_LABELS};
use market_models::{calibrate_shift, MarketParams, RateShock, ShiftCurve};
use mlmc_core::{EstimatorConfig, StreamKey};
use serde::{Deserialize, Serialize};
use toy_butterfly::ButterflyParams;

use crate::HarnessError;

fn powers_of_two(from: u32, to: u32) -> Vec<usize> {
    (from..=to).map(|e| 1usize << e).collect()
}

fn dyadic_epsilons(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|e| 2f64.powi(-e)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: u64,
    /// Output directory.
    pub out: PathBuf,
    /// Independent macro-replications behind every RMSE.
    pub n_batch: usize,
    /// Inner-draw budget `Γ` of the nested reference run (`Γ^{2/3}` outer, `Γ^{1/3}` inner).
    pub reference_budget: f64,
    pub toy: ToySection,
    pub market: MarketSection,
    pub alm: AlmSection,
    pub shocks: ShockSection,
    pub estimator: EstimatorSection,
    pub toy_bias: DiagnosticsSection,
    pub toy_levelvar: DiagnosticsSection,
    pub toy_rmse: ToyRmseSection,
    pub toy_lsmc: ToyLsmcSection,
    pub alm_select: SelectSection,
    pub alm_rmse: AlmRmseSection,
    pub alm_eta: AlmEtaSection,
    pub alm_frontier: FrontierSection,
    pub alm_sensitivity: SensitivitySection,
    pub alm_premia: PremiaSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            out: PathBuf::from("results"),
            n_batch: 10,
            reference_budget: 1e6,
            toy: ToySection::default(),
            market: MarketSection::default(),
            alm: AlmSection::default(),
            shocks: ShockSection::default(),
            estimator: EstimatorSection::default(),
            toy_bias: DiagnosticsSection::default(),
            toy_levelvar: DiagnosticsSection::default(),
            toy_rmse: ToyRmseSection::default(),
            toy_lsmc: ToyLsmcSection::default(),
            alm_select: SelectSection::default(),
            alm_rmse: AlmRmseSection::default(),
            alm_eta: AlmEtaSection::default(),
            alm_frontier: FrontierSection::default(),
            alm_sensitivity: SensitivitySection::default(),
            alm_premia: PremiaSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToySection {
    pub s0: f64,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub maturity: f64,
    pub shock_time: f64,
    pub s_up: f64,
    pub s_down: f64,
    /// Tolerance of the quadrature reference value.
    pub reference_tolerance: f64,
}

impl Default for ToySection {
    fn default() -> Self {
        let p = ButterflyParams::default();
        Self {
            s0: p.s0,
            sigma: p.sigma,
            k1: p.k1,
            k2: p.k2,
            maturity: p.maturity,
            shock_time: p.shock_time,
            s_up: p.s_up,
            s_down: p.s_down,
            reference_tolerance: 1e-10,
        }
    }
}

impl ToySection {
    pub fn params(&self) -> ButterflyParams {
        ButterflyParams {
            s0: self.s0,
            sigma: self.sigma,
            k1: self.k1,
            k2: self.k2,
            maturity: self.maturity,
            shock_time: self.shock_time,
            s_up: self.s_up,
            s_down: self.s_down,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketSection {
    pub s0: f64,
    pub sigma_s: f64,
    pub x0: f64,
    pub k: f64,
    pub theta: f64,
    pub sigma_r: f64,
    pub gamma: f64,
    pub lambda_w: f64,
    pub lambda_z: f64,
    /// Annual shift values `φ(0), φ(1), …`.
    pub shift: Vec<f64>,
    /// Shift value beyond the tabulated years.
    pub shift_tail: f64,
    /// Initial zero rates for maturities 1, 2, …; when set, the shift is
    /// calibrated to them and `shift`/`shift_tail` must be left empty.
    pub zero_curve: Option<Vec<f64>>,
}

impl Default for MarketSection {
    fn default() -> Self {
        let m = MarketParams::default();
        Self {
            s0: m.s0,
            sigma_s: m.sigma_s,
            x0: m.x0,
            k: m.k,
            theta: m.theta,
            sigma_r: m.sigma_r,
            gamma: m.gamma,
            lambda_w: m.lambda_w,
            lambda_z: m.lambda_z,
            shift: Vec::new(),
            shift_tail: 0.0,
            zero_curve: None,
        }
    }
}

impl MarketSection {
    pub fn params(&self) -> Result<MarketParams, HarnessError> {
        let mut m = MarketParams {
            s0: self.s0,
            sigma_s: self.sigma_s,
            x0: self.x0,
            k: self.k,
            theta: self.theta,
            sigma_r: self.sigma_r,
            gamma: self.gamma,
            lambda_w: self.lambda_w,
            lambda_z: self.lambda_z,
            shift: ShiftCurve::new(self.shift.clone(), self.shift_tail).map_err(|e| config_err("market.shift", e))?,
        };
        if let Some(z) = &self.zero_curve {
            if !self.shift.is_empty() || self.shift_tail != 0.0 {
                return Err(HarnessError::Config("market: zero_curve and shift are mutually exclusive".into()));
            }
            m.shift = calibrate_shift(&m, z).map_err(|e| config_err("market.zero_curve", e))?;
        }
        m.validate().map_err(|e| config_err("market", e))?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlmSection {
    pub w_s: f64,
    pub pi_pr: f64,
    pub r_g: f64,
    pub p_exit: f64,
    pub dsr_max: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho_bar: f64,
    pub n: usize,
    pub horizon: usize,
    pub mr0: f64,
}

impl Default for AlmSection {
    fn default() -> Self {
        let p = AlmParams::default();
        Self {
            w_s: p.w_s,
            pi_pr: p.pi_pr,
            r_g: p.r_g,
            p_exit: p.p_exit,
            dsr_max: p.dsr_max,
            alpha: p.alpha,
            beta: p.beta,
            rho_bar: p.rho_bar,
            n: p.n,
            horizon: p.horizon,
            mr0: p.mr0,
        }
    }
}

impl AlmSection {
    pub fn params(&self) -> Result<AlmParams, HarnessError> {
        let p = AlmParams {
            w_s: self.w_s,
            pi_pr: self.pi_pr,
            r_g: self.r_g,
            p_exit: self.p_exit,
            dsr_max: self.dsr_max,
            alpha: self.alpha,
            beta: self.beta,
            rho_bar: self.rho_bar,
            n: self.n,
            horizon: self.horizon,
            mr0: self.mr0,
        };
        p.validate().map_err(|e| config_err("alm", e))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShockSection {
    /// Relative drop of the equity price.
    pub equity: f64,
    /// Factor applied to every shock magnitude.
    pub scale: f64,
    /// Rate shock rows `[maturity, up, down]`; the built-in table when empty.
    pub table: Vec<[f64; 3]>,
    /// Shock table file (`maturity up down` per line), read into `table`.
    pub table_file: Option<PathBuf>,
}

impl Default for ShockSection {
    fn default() -> Self {
        Self {
            equity: ShockSpec::default().equity,
            scale: 1.0,
            table: Vec::new(),
            table_file: None,
        }
    }
}

impl ShockSection {
    pub fn spec(&self) -> Result<ShockSpec, HarnessError> {
        if self.table_file.is_some() {
            return Err(HarnessError::Config("shocks.table_file was not resolved".into()));
        }
        let rate = if self.table.is_empty() {
            RateShock::standard()
        } else {
            let col = |i: usize| self.table.iter().map(|r| r[i]).collect::<Vec<f64>>();
            RateShock::new(col(0), col(1), col(2)).map_err(|e| config_err("shocks.table", e))?
        };
        Ok(ShockSpec {
            rate,
            equity: self.equity,
        }
        .scaled(self.scale))
    }
}

/// Multilevel settings shared by the ALM experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSection {
    pub epsilon: f64,
    pub eta: f64,
    pub k0: usize,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            epsilon: 1.0 / 32.0,
            eta: 0.75,
            k0: 2,
        }
    }
}

impl EstimatorSection {
    pub fn config(&self) -> Result<EstimatorConfig, HarnessError> {
        EstimatorConfig::new(self.epsilon, self.eta, self.k0).map_err(|e| config_err("estimator", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Inner sample sizes (even).
    pub k: Vec<usize>,
    /// Outer scenarios per inner sample size.
    pub j: usize,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            k: powers_of_two(4, 10),
            j: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToyRmseSection {
    pub epsilons: Vec<f64>,
    pub etas: Vec<f64>,
    pub k0: usize,
    /// Also run the plain multilevel estimator.
    pub plain: bool,
    /// Also run the nested estimator with `J = ε⁻²`, `K = ε^{−2/(1+η)}`.
    pub nested: bool,
}

impl Default for ToyRmseSection {
    fn default() -> Self {
        Self {
            epsilons: dyadic_epsilons(2, 6),
            etas: vec![1.0, 0.75, 0.5],
            k0: 2,
            plain: true,
            nested: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToyLsmcSection {
    pub j: Vec<usize>,
    /// `N_r = round(n_r_scale · J^{1/3})` cells.
    pub n_r_scale: f64,
    /// Cells cover the standardized outer variable on `[−bound, bound]`.
    pub bound: f64,
}

impl Default for ToyLsmcSection {
    fn default() -> Self {
        Self {
            j: vec![1_000, 3_000, 10_000, 30_000, 100_000, 300_000, 1_000_000],
            n_r_scale: 1.0,
            bound: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectSection {
    pub t: usize,
    /// Validation scenarios.
    pub j_v: usize,
    /// Inner draws per validation scenario.
    pub k: usize,
    pub n_r: usize,
    pub max_vars: usize,
    /// SCR module used as regression target.
    pub module: String,
}

impl Default for SelectSection {
    fn default() -> Self {
        Self {
            t: 10,
            j_v: 2_000,
            k: 10_000,
            n_r: 5,
            max_vars: 3,
            module: "scr_int".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlmRmseSection {
    pub t: usize,
    pub module: String,
    pub eta: f64,
    pub k0: usize,
    pub epsilons: Vec<f64>,
    /// Training sizes of the regression estimators.
    pub lsmc_j: Vec<usize>,
    /// Cells per axis for one, two, three… regressors.
    pub n_r: Vec<usize>,
    /// Regressor indices (risk-factor order); selected by forward selection
    /// with the `alm_select` settings when absent.
    pub features: Option<Vec<usize>>,
}

impl Default for AlmRmseSection {
    fn default() -> Self {
        Self {
            t: 10,
            module: "scr_int".into(),
            eta: 0.75,
            k0: 2,
            epsilons: dyadic_epsilons(3, 6),
            lsmc_j: vec![1_000, 4_000, 16_000, 64_000],
            n_r: vec![100, 23, 13],
            features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlmEtaSection {
    pub t: usize,
    pub module: String,
    pub etas: Vec<f64>,
    pub k0: usize,
    pub epsilons: Vec<f64>,
}

impl Default for AlmEtaSection {
    fn default() -> Self {
        Self {
            t: 10,
            module: "scr_int".into(),
            etas: vec![0.5, 0.75, 1.0],
            k0: 2,
            epsilons: dyadic_epsilons(3, 6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrontierSection {
    pub times: Vec<usize>,
    pub w_s: Vec<f64>,
}

impl Default for FrontierSection {
    fn default() -> Self {
        Self {
            times: vec![0, 10, 20],
            w_s: (0..=6).map(|i| 0.025 * i as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivitySection {
    pub t: usize,
    pub w_s: f64,
    pub d_s0: f64,
    pub d_r0: f64,
    pub j: usize,
    pub k: usize,
}

impl Default for SensitivitySection {
    fn default() -> Self {
        Self {
            t: 10,
            w_s: 0.05,
            d_s0: 0.01,
            d_r0: 0.001,
            j: 2_000,
            k: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterMeasureName {
    Weighted,
    Real,
}

impl From<OuterMeasureName> for OuterMeasure {
    fn from(m: OuterMeasureName) -> Self {
        match m {
            OuterMeasureName::Weighted => OuterMeasure::Weighted,
            OuterMeasureName::Real => OuterMeasure::Real,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PremiaSection {
    pub times: Vec<usize>,
    /// Interest-rate premia, run with `λ^W` from `[market]`.
    pub lambda_z: Vec<f64>,
    /// Equity premia, run with `λ^Z` from `[market]`.
    pub lambda_w: Vec<f64>,
    pub outer_measure: OuterMeasureName,
}

impl Default for PremiaSection {
    fn default() -> Self {
        Self {
            times: vec![1, 5, 10, 15, 20, 25],
            lambda_z: vec![0.0, 0.1, 0.2, 0.3],
            lambda_w: vec![0.0, 0.1, 0.2, 0.3],
            outer_measure: OuterMeasureName::Real,
        }
    }
}

fn config_err(key: &str, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("{key}: {e}"))
}

/// Index of an SCR module name in the aggregator list.
pub fn module_index(name: &str) -> Result<usize, HarnessError> {
    SCR_LABELS
        .iter()
        .position(|l| *l == name)
        .ok_or_else(|| HarnessError::Config(format!("unknown SCR module {name:?}; expected one of {SCR_LABELS:?}")))
}

impl Config {
    /// Parses TOML text. Errors carry the line and column of the offending key.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Reads and parses `path`, then resolves file references relative to it.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.resolve(path.parent().unwrap_or(Path::new(".")))?;
        Ok(cfg)
    }

    /// Inlines the shock table file so the resolved configuration is
    /// self-contained.
    pub fn resolve(&mut self, base: &Path) -> Result<(), HarnessError> {
        if let Some(file) = self.shocks.table_file.take() {
            if !self.shocks.table.is_empty() {
                return Err(HarnessError::Config("shocks: table and table_file are mutually exclusive".into()));
            }
            let path = if file.is_absolute() { file } else { base.join(file) };
            let shock = RateShock::load(&path).map_err(|e| config_err("shocks.table_file", e))?;
            self.shocks.table = shock.rows().map(|(m, u, d)| [m, u, d]).collect();
        }
        Ok(())
    }

    /// Checks the parameter blocks shared by all experiments.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n_batch == 0 {
            return Err(HarnessError::Config("n_batch must be positive".into()));
        }
        if !(self.reference_budget >= 1.0) {
            return Err(HarnessError::Config("reference_budget must be at least 1".into()));
        }
        self.toy.params().validate().map_err(|e| config_err("toy", e))?;
        self.market.params()?;
        self.alm.params()?;
        self.shocks.spec()?;
        Ok(())
    }

    /// SCR problem settings at date `t` from the shared blocks.
    pub fn scr_config(&self, t: usize) -> Result<ScrConfig, HarnessError> {
        let mut cfg = ScrConfig::new(t, self.alm.params()?, self.market.params()?);
        cfg.shocks = self.shocks.spec()?;
        Ok(cfg)
    }

    /// Seed of macro-replication `b`.
    pub fn batch_seed(&self, b: usize) -> u64 {
        StreamKey::new(self.seed, u64::MAX, b as u64, 0).digest()
    }
}
