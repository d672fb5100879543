use market_models::{swap_rate, AffineTable, MarketState, ShiftCurve};

use crate::{AlmError, AlmParams};

/// Balance sheet after the reallocation and externalization of date `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceSheet {
    pub t: usize,
    /// Equity units.
    pub phi_s: f64,
    /// Units of the equally weighted bond ladder.
    pub phi_b: f64,
    /// `coupons[i−1]` is the coupon of the rung with residual maturity `i`.
    pub coupons: Vec<f64>,
    pub bv_s: f64,
    /// Book value of bonds; equal to the nominal held since bonds are bought at par.
    pub bv_b: f64,
    /// Mathematical reserve.
    pub mr: f64,
    /// Profit-sharing reserve.
    pub psr: f64,
    /// Capitalization reserve, held outside the asset portfolio.
    pub cr: f64,
    /// Market value of the asset portfolio.
    pub mv: f64,
    /// Price of one ladder unit, `B̄(t, n, c_t)`.
    pub ladder_price: f64,
    /// One-year discount factor `P(t, t+1)` used to accrue the capitalization reserve.
    pub zc1: f64,
    /// Spread between the credited rate and the competitor rate.
    pub delta: f64,
    pub insolvent: bool,
}

impl BalanceSheet {
    /// Inception: `MR_0` invested at the target weights, bonds bought at par.
    pub fn initial(
        params: &AlmParams,
        state: &MarketState,
        shift: &ShiftCurve,
        table: &AffineTable,
    ) -> Result<Self, AlmError> {
        params.validate()?;
        let zc = table.curve(state.t, state.x, shift, params.n)?;
        let coupons = (1..=params.n).map(|i| swap_rate(&zc, i)).collect::<Result<Vec<_>, _>>()?;
        let equity = params.w_s * params.mr0;
        let bonds = params.mr0 - equity;
        Ok(Self {
            t: state.t,
            phi_s: equity / state.s,
            phi_b: bonds,
            coupons,
            bv_s: equity,
            bv_b: bonds,
            mr: params.mr0,
            psr: 0.0,
            cr: 0.0,
            mv: params.mr0,
            ladder_price: 1.0,
            zc1: zc[1],
            delta: 0.0,
            insolvent: false,
        })
    }

    /// Market value of the bond position.
    pub fn bond_value(&self) -> f64 {
        self.phi_b * self.ladder_price
    }

    pub fn latent_stock_gain(&self, s: f64) -> f64 {
        self.phi_s * s - self.bv_s
    }
}

/// Twelve state variables used as regression features, in the order
/// `(S, r, φ^S, φ^b, BV^b, BV^S, MR, PSR, CR, MV, φ^b·B̄, φ^S·S)`.
pub fn risk_factors(sheet: &BalanceSheet, state: &MarketState) -> [f64; 12] {
    [
        state.s,
        state.r,
        sheet.phi_s,
        sheet.phi_b,
        sheet.bv_b,
        sheet.bv_s,
        sheet.mr,
        sheet.psr,
        sheet.cr,
        sheet.mv,
        sheet.bond_value(),
        sheet.phi_s * state.s,
    ]
}

pub const RISK_FACTOR_NAMES: [&str; 12] = [
    "S", "r", "phi_S", "phi_b", "BV_b", "BV_S", "MR", "PSR", "CR", "MV", "bond_value", "stock_value",
];
