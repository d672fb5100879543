use market_models::{
    apply_rate_shock, gaussian_triple, step_exact, to_real_measure, zero_rates, AffineTable, Direction, GaussianTriple, MarketParams,
    MarketState, RateShock,
};
use mlmc_core::{Aggregator, NestedProblem, SampleError, StreamRng};

use crate::projection::{step_in_place, StepMarket, Workspace};
use crate::{AlmError, AlmParams, BalanceSheet};

/// Stress applied immediately after the reallocation at the valuation date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shock {
    RateUp,
    RateDown,
    Equity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockSpec {
    pub rate: RateShock,
    /// Relative drop of the equity price.
    pub equity: f64,
}

impl Default for ShockSpec {
    fn default() -> Self {
        Self {
            rate: RateShock::standard(),
            equity: 0.39,
        }
    }
}

impl ShockSpec {
    /// All magnitudes multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rate: self.rate.scaled(factor),
            equity: self.equity * factor,
        }
    }
}

/// How outer scenarios represent the real-world measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterMeasure {
    /// Risk-neutral paths weighted by the density `L_t`.
    Weighted,
    /// Real-world paths with unit weight.
    Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScrConfig {
    /// Valuation date of the SCR.
    pub t: usize,
    pub alm: AlmParams,
    /// Market model used for simulation.
    pub market: MarketParams,
    pub shocks: ShockSpec,
    /// Market used to set up the inception portfolio, when it differs from
    /// the simulated one (an instantaneous move right after inception).
    pub inception: Option<MarketParams>,
    pub outer_measure: OuterMeasure,
}

impl ScrConfig {
    pub fn new(t: usize, alm: AlmParams, market: MarketParams) -> Self {
        Self {
            t,
            alm,
            market,
            shocks: ShockSpec::default(),
            inception: None,
            outer_measure: OuterMeasure::Weighted,
        }
    }
}

/// Outer scenario: the projected balance sheet and market at the valuation
/// date, the density weight and the per-scenario shocked markets.
#[derive(Debug, Clone)]
pub struct OuterState {
    pub sheet: BalanceSheet,
    pub state: MarketState,
    pub weight: f64,
    market_up: MarketParams,
    market_down: MarketParams,
}

impl OuterState {
    pub fn shifted_market(&self, direction: Direction) -> &MarketParams {
        match direction {
            Direction::Up => &self.market_up,
            Direction::Down => &self.market_down,
        }
    }
}

/// Market SCR at date `t` as a nested expectation. An inner draw is one
/// risk-neutral path from `t` to the horizon shared by four projections
/// (base, rates up, rates down, equity down) and returns the discounted P&L
/// differences `(base − up, base − down, base − equity, 0)`.
#[derive(Debug, Clone)]
pub struct ScrProblem {
    cfg: ScrConfig,
    table: AffineTable,
    sheet0: BalanceSheet,
    start: MarketState,
}

impl ScrProblem {
    pub fn new(cfg: ScrConfig) -> Result<Self, AlmError> {
        cfg.alm.validate()?;
        cfg.market.validate()?;
        if cfg.t >= cfg.alm.horizon {
            return Err(AlmError::Param(format!(
                "valuation date {} must precede the horizon {}",
                cfg.t, cfg.alm.horizon
            )));
        }
        if !(0.0..=1.0).contains(&cfg.shocks.equity) {
            return Err(AlmError::Param(format!("equity shock {} outside [0, 1]", cfg.shocks.equity)));
        }
        let max_maturity = cfg.alm.horizon + cfg.alm.n;
        let table = AffineTable::new(&cfg.market, max_maturity)?;
        let inception = cfg.inception.as_ref().unwrap_or(&cfg.market);
        let inception_table = AffineTable::new(inception, cfg.alm.n)?;
        let sheet0 = BalanceSheet::initial(&cfg.alm, &MarketState::initial(inception), &inception.shift, &inception_table)?;
        let start = MarketState::initial(&cfg.market);
        Ok(Self {
            cfg,
            table,
            sheet0,
            start,
        })
    }

    pub fn config(&self) -> &ScrConfig {
        &self.cfg
    }

    pub fn table(&self) -> &AffineTable {
        &self.table
    }

    pub fn initial_sheet(&self) -> &BalanceSheet {
        &self.sheet0
    }

    /// Outer scenario driven by the given stream.
    pub fn outer(&self, rng: &mut StreamRng) -> Result<OuterState, AlmError> {
        let m = &self.cfg.market;
        let mut sheet = self.sheet0.clone();
        let mut state = self.start;
        let mut ws = Workspace::default();
        for _ in 0..self.cfg.t {
            let mut g = gaussian_triple(rng, m.k, m.gamma);
            if self.cfg.outer_measure == OuterMeasure::Real {
                g = to_real_measure(&g, m);
            }
            state = step_exact(&state, m, &g);
            let market = StepMarket {
                state: &state,
                shift: &m.shift,
                table: &self.table,
            };
            step_in_place(&mut sheet, &market, &self.cfg.alm, &mut ws)?;
        }
        let t = self.cfg.t;
        let horizon = self.cfg.alm.horizon + self.cfg.alm.n - t;
        let z = zero_rates(&self.table.curve(t, state.x, &m.shift, horizon)?);
        let shifted = |d: Direction| -> Result<MarketParams, AlmError> {
            let delta = apply_rate_shock(&z, &self.cfg.shocks.rate, d)?;
            Ok(MarketParams {
                shift: m.shift.with_added_from(t, &delta),
                ..m.clone()
            })
        };
        Ok(OuterState {
            weight: match self.cfg.outer_measure {
                OuterMeasure::Weighted => state.l,
                OuterMeasure::Real => 1.0,
            },
            market_up: shifted(Direction::Up)?,
            market_down: shifted(Direction::Down)?,
            sheet,
            state,
        })
    }

    /// Discounted P&L from `t` to the horizon of one projection along `path`.
    fn projected_value(
        &self,
        outer: &OuterState,
        shock: Option<Shock>,
        path: &[GaussianTriple],
        ws: &mut Workspace,
    ) -> Result<f64, AlmError> {
        let market = match shock {
            Some(Shock::RateUp) => &outer.market_up,
            Some(Shock::RateDown) => &outer.market_down,
            _ => &self.cfg.market,
        };
        let mut sheet = outer.sheet.clone();
        let mut state = outer.state;
        match shock {
            Some(Shock::Equity) => state.s *= 1.0 - self.cfg.shocks.equity,
            Some(Shock::RateUp | Shock::RateDown) => {
                sheet.zc1 = self.table.zc_price(state.t, state.x, &market.shift, 1)?;
            }
            None => {}
        }
        let mut value = 0.0;
        let mut int_r = 0.0;
        for g in path {
            state = step_exact(&state, market, g);
            int_r += state.int_r;
            let m = StepMarket {
                state: &state,
                shift: &market.shift,
                table: &self.table,
            };
            let out = step_in_place(&mut sheet, &m, &self.cfg.alm, ws)?;
            value += (-int_r).exp() * out.pnl;
        }
        Ok(value)
    }

    fn inner_path(&self, rng: &mut StreamRng) -> Vec<GaussianTriple> {
        let m = &self.cfg.market;
        (self.cfg.t..self.cfg.alm.horizon)
            .map(|_| gaussian_triple(rng, m.k, m.gamma))
            .collect()
    }

    /// Discounted P&L of the four projections along one inner path, in the
    /// order base, rates up, rates down, equity.
    pub fn inner_values(&self, outer: &OuterState, rng: &mut StreamRng) -> Result<[f64; 4], AlmError> {
        let path = self.inner_path(rng);
        let mut ws = Workspace::default();
        let mut out = [0.0; 4];
        for (o, shock) in out.iter_mut().zip([None, Some(Shock::RateUp), Some(Shock::RateDown), Some(Shock::Equity)]) {
            *o = self.projected_value(outer, shock, &path, &mut ws)?;
        }
        Ok(out)
    }

    /// Basic own funds at the valuation date from `k` inner paths, optionally
    /// under a shock. Shocked and unshocked calls with the same `seed` and
    /// `scenario` use identical draws.
    pub fn bof(&self, outer: &OuterState, shock: Option<Shock>, k: usize, seed: u64, scenario: u64) -> Result<f64, AlmError> {
        if k == 0 {
            return Err(AlmError::Param("K must be positive".into()));
        }
        let mut ws = Workspace::default();
        let mut sum = 0.0;
        for d in 0..k as u64 {
            let path = self.inner_path(&mut StreamRng::from_parts(seed, 0, scenario, d));
            sum += self.projected_value(outer, shock, &path, &mut ws)?;
        }
        Ok(sum / k as f64)
    }
}

impl NestedProblem for ScrProblem {
    type Outer = OuterState;

    fn components(&self) -> usize {
        4
    }

    fn sample_outer(&self, rng: &mut StreamRng) -> Result<OuterState, SampleError> {
        Ok(self.outer(rng)?)
    }

    fn sample_inner(&self, outer: &OuterState, rng: &mut StreamRng, out: &mut [f64]) -> Result<(), SampleError> {
        let [base, up, down, eq] = self.inner_values(outer, rng)?;
        out[0] = base - up;
        out[1] = base - down;
        out[2] = base - eq;
        out[3] = 0.0;
        Ok(())
    }

    fn weight(&self, outer: &OuterState) -> f64 {
        outer.weight
    }

    fn inner_cost_hint(&self) -> f64 {
        1.0
    }
}

/// Standard-formula market aggregation: `√(eq² + int² + 2ε·eq·int)` with
/// `ε = ½` when the interest module is driven by the downward shock.
pub fn aggregate_mkt(scr_eq: f64, scr_int: f64, int_driver: Direction) -> Result<f64, AlmError> {
    if !(scr_eq >= 0.0 && scr_int >= 0.0) {
        return Err(AlmError::Param(format!("SCR modules must be non-negative: eq={scr_eq}, int={scr_int}")));
    }
    let eps = match int_driver {
        Direction::Up => 0.0,
        Direction::Down => 0.5,
    };
    Ok((scr_eq * scr_eq + scr_int * scr_int + 2.0 * eps * scr_eq * scr_int).sqrt())
}

/// SCR modules evaluated from conditional means `(base − up, base − down, base − equity, …)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScrReport {
    pub scr_up: f64,
    pub scr_down: f64,
    pub scr_int: f64,
    pub scr_eq: f64,
    pub scr_mkt: f64,
    pub epsilon_used: f64,
}

impl ScrReport {
    pub fn from_means(m: &[f64]) -> Self {
        let scr_up = m[0].max(0.0);
        let scr_down = m[1].max(0.0);
        let scr_int = scr_up.max(scr_down);
        let scr_eq = m[2].max(0.0);
        let driver = if m[1] > m[0] { Direction::Down } else { Direction::Up };
        let scr_mkt = aggregate_mkt(scr_eq, scr_int, driver).expect("modules are non-negative");
        Self {
            scr_up,
            scr_down,
            scr_int,
            scr_eq,
            scr_mkt,
            epsilon_used: if driver == Direction::Down { 0.5 } else { 0.0 },
        }
    }
}

pub const SCR_LABELS: [&str; 5] = ["scr_int", "scr_up", "scr_down", "scr_eq", "scr_mkt"];

/// Aggregators for `SCR_LABELS`, all evaluated on the same inner means.
pub fn scr_aggregators() -> Vec<Aggregator> {
    vec![
        Aggregator::new(SCR_LABELS[0], |m: &[f64]| m[0].max(m[1]).max(m[3])),
        Aggregator::new(SCR_LABELS[1], |m: &[f64]| m[0].max(m[3])),
        Aggregator::new(SCR_LABELS[2], |m: &[f64]| m[1].max(m[3])),
        Aggregator::new(SCR_LABELS[3], |m: &[f64]| m[2].max(m[3])),
        Aggregator::new(SCR_LABELS[4], |m: &[f64]| ScrReport::from_means(m).scr_mkt),
    ]
}
