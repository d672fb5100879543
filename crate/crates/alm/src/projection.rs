use market_models::{AffineTable, MarketState, ShiftCurve};

use crate::crediting::{credit, CreditingCase, CreditingInput, CreditingOutcome};
use crate::{AlmError, AlmParams, BalanceSheet};

const CONSERVATION_TOL: f64 = 1e-9;
const WEIGHT_TOL: f64 = 1e-10;
const PAR_TOL: f64 = 1e-12;

/// Market inputs of one year-end: the state at `t` and the curve ingredients.
#[derive(Debug, Clone, Copy)]
pub struct StepMarket<'a> {
    pub state: &'a MarketState,
    pub shift: &'a ShiftCurve,
    pub table: &'a AffineTable,
}

/// What happened during the year ending at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct YearOutcome {
    pub t: usize,
    /// `None` once the scenario is frozen by insolvency.
    pub crediting: Option<CreditingOutcome>,
    pub pnl: f64,
    /// Total exit rate `p^e` applied during the year.
    pub exit_rate: f64,
    /// Realized bond gain (negative: loss) routed to the capitalization reserve.
    pub bond_gain: f64,
    /// Market value before reallocation, cash gap included.
    pub mv_before: f64,
    /// Market value after reallocation, before externalization.
    pub mv_after: f64,
    pub liquidation: bool,
}

/// Scratch buffers reused across steps.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    zc: Vec<f64>,
    annuity: Vec<f64>,
    coupons: Vec<f64>,
}

/// Advances `sheet` from `t−1` to `t = market.state.t`, liquidating when `t`
/// is the horizon.
pub fn step_in_place(
    sheet: &mut BalanceSheet,
    market: &StepMarket<'_>,
    params: &AlmParams,
    ws: &mut Workspace,
) -> Result<YearOutcome, AlmError> {
    let t = market.state.t;
    if t != sheet.t + 1 {
        return Err(AlmError::Param(format!("market date {t} does not follow sheet date {}", sheet.t)));
    }
    if t > params.horizon {
        return Err(AlmError::Param(format!("date {t} beyond horizon {}", params.horizon)));
    }
    if sheet.insolvent {
        sheet.t = t;
        return Ok(frozen(t, t == params.horizon));
    }
    let n = params.n;
    let nf = n as f64;
    market.table.curve_into(t, market.state.x, market.shift, n, &mut ws.zc)?;
    let zc = &ws.zc;
    ws.annuity.clear();
    ws.annuity.push(0.0);
    for i in 1..=n {
        let a = ws.annuity[i - 1] + zc[i];
        ws.annuity.push(a);
    }
    let ann = &ws.annuity;

    // Cash from the maturing rung and all coupons.
    let unit = sheet.phi_b / nf;
    let coupon_cash = unit * sheet.coupons.iter().sum::<f64>();
    let bv_b_left = sheet.bv_b - unit;

    // Exits remunerated at half the guaranteed rate.
    let exit_rate = (params.p_exit + params.dsr(sheet.delta)).min(1.0);
    let exit_pay = exit_rate * sheet.mr * (1.0 + 0.5 * params.r_g);
    let mr_base = sheet.mr * (1.0 - exit_rate);
    let gap = unit + coupon_cash - exit_pay;

    let s = market.state.s;
    let old_sum: f64 = (1..n).map(|i| sheet.coupons[i] * ann[i] + zc[i]).sum();
    let old_mv = unit * old_sum;
    let mv = gap + sheet.phi_s * s + old_mv;

    if t == params.horizon {
        return Ok(liquidate(sheet, params, t, mv, coupon_cash, old_mv - bv_b_left, mr_base, exit_rate, market));
    }
    if !(mv > 0.0) {
        sheet.insolvent = true;
        sheet.t = t;
        let mut out = frozen(t, false);
        out.exit_rate = exit_rate;
        out.mv_before = mv;
        return Ok(out);
    }

    // Equities.
    let phi_s = params.w_s * mv / s;
    let mut bv_s = sheet.bv_s;
    let mut stock_gain = 0.0;
    if phi_s >= sheet.phi_s {
        bv_s += (phi_s - sheet.phi_s) * s;
    } else {
        let ratio = phi_s / sheet.phi_s;
        stock_gain = (sheet.phi_s - phi_s) * s - bv_s * (1.0 - ratio);
        bv_s *= ratio;
    }

    // Bonds: keep the ladder equally weighted, buying at par or selling at market.
    let target_b = (1.0 - params.w_s) * mv;
    let swap = |i: usize| (1.0 - zc[i]) / ann[i];
    ws.coupons.clear();
    let (phi_b, bond_gain) = if target_b - old_mv >= unit {
        let phi_b = target_b - old_mv + unit * (nf - 1.0);
        for i in 1..n {
            let c = if phi_b > 0.0 {
                (sheet.phi_b * sheet.coupons[i] + (phi_b - sheet.phi_b) * swap(i)) / phi_b
            } else {
                swap(i)
            };
            ws.coupons.push(c);
            check_par(swap(i), ann[i], zc[i])?;
        }
        (phi_b, 0.0)
    } else {
        let phi_b = target_b / (old_mv / sheet.phi_b + 1.0 / nf);
        ws.coupons.extend_from_slice(&sheet.coupons[1..]);
        let premium: f64 = (1..n).map(|i| sheet.coupons[i] * ann[i] + zc[i] - 1.0).sum();
        (phi_b, (sheet.phi_b - phi_b) / nf * premium)
    };
    ws.coupons.push(swap(n));
    check_par(swap(n), ann[n], zc[n])?;
    let ladder_price = (1..=n).map(|i| ws.coupons[i - 1] * ann[i] + zc[i]).sum::<f64>() / nf;

    let mv_after = phi_s * s + phi_b * ladder_price;
    if (mv_after - mv).abs() > CONSERVATION_TOL * mv {
        return Err(AlmError::Invariant(format!(
            "t={t}: reallocation changed market value from {mv} to {mv_after}"
        )));
    }
    if (phi_s * s / mv - params.w_s).abs() > WEIGHT_TOL {
        return Err(AlmError::Invariant(format!("t={t}: equity weight {} not attained", phi_s * s / mv)));
    }

    // Crediting.
    let outcome = credit(&CreditingInput {
        mr_base,
        income: coupon_cash + stock_gain,
        psr: sheet.psr,
        latent_gain: phi_s * s - bv_s,
        r_g: params.r_g,
        r_comp: market.state.r,
        pi_pr: params.pi_pr,
        rho_bar: params.rho_bar,
    });
    check_crediting(&outcome, params, coupon_cash + stock_gain, t)?;
    bv_s += outcome.realized_gain;

    // Capitalization reserve: gains stored, losses drawn until empty.
    let cr_interest = sheet.cr * (1.0 / sheet.zc1 - 1.0);
    let draw = if bond_gain < 0.0 { (-bond_gain).min(sheet.cr) } else { 0.0 };
    let excess_loss = if bond_gain < 0.0 { -bond_gain - draw } else { 0.0 };
    let cr = sheet.cr + bond_gain.max(0.0) - draw;
    let pnl = outcome.margin + cr_interest - excess_loss;

    // Externalization of the margin and reserve transfers, at constant weights.
    let external = outcome.margin - excess_loss + bond_gain.max(0.0) - draw;
    let f = (mv - external) / mv;
    let mut crediting = outcome;
    crediting.pnl = pnl;
    sheet.t = t;
    sheet.mr = mr_base * (1.0 + outcome.r_ph);
    sheet.psr = outcome.psr;
    sheet.cr = cr;
    sheet.delta = outcome.r_ph - market.state.r;
    sheet.zc1 = zc[1];
    sheet.ladder_price = ladder_price;
    std::mem::swap(&mut sheet.coupons, &mut ws.coupons);
    if !(f > 0.0) {
        sheet.insolvent = true;
        sheet.phi_s = 0.0;
        sheet.phi_b = 0.0;
        sheet.bv_s = 0.0;
        sheet.bv_b = 0.0;
        sheet.mv = 0.0;
        let mut out = frozen(t, false);
        out.exit_rate = exit_rate;
        out.mv_before = mv;
        out.mv_after = mv_after;
        return Ok(out);
    }
    sheet.phi_s = phi_s * f;
    sheet.phi_b = phi_b * f;
    sheet.bv_s = bv_s * f;
    sheet.bv_b = phi_b * f;
    sheet.mv = mv * f;
    Ok(YearOutcome {
        t,
        crediting: Some(crediting),
        pnl,
        exit_rate,
        bond_gain,
        mv_before: mv,
        mv_after,
        liquidation: false,
    })
}

/// Final date: the crediting waterfall runs once more with the whole
/// profit-sharing reserve released, then everything is sold; policyholders
/// receive `MR_T` and the shareholder the rest of the portfolio and the
/// capitalization reserve.
#[allow(clippy::too_many_arguments)]
fn liquidate(
    sheet: &mut BalanceSheet,
    params: &AlmParams,
    t: usize,
    mv: f64,
    coupon_cash: f64,
    bond_gain: f64,
    mr_base: f64,
    exit_rate: f64,
    market: &StepMarket<'_>,
) -> YearOutcome {
    let outcome = credit(&CreditingInput {
        mr_base,
        income: coupon_cash,
        psr: sheet.psr,
        latent_gain: sheet.latent_stock_gain(market.state.s),
        r_g: params.r_g,
        r_comp: market.state.r,
        pi_pr: params.pi_pr,
        rho_bar: 1.0,
    });
    let mr = mr_base * (1.0 + outcome.r_ph);
    let cr_value = sheet.cr / sheet.zc1;
    let pnl = mv - mr + cr_value;
    let mut crediting = outcome;
    crediting.pnl = pnl;
    *sheet = BalanceSheet {
        t,
        phi_s: 0.0,
        phi_b: 0.0,
        coupons: std::mem::take(&mut sheet.coupons),
        bv_s: 0.0,
        bv_b: 0.0,
        mr: 0.0,
        psr: 0.0,
        cr: 0.0,
        mv: 0.0,
        ladder_price: sheet.ladder_price,
        zc1: 1.0,
        delta: outcome.r_ph - market.state.r,
        insolvent: sheet.insolvent,
    };
    YearOutcome {
        t,
        crediting: Some(crediting),
        pnl,
        exit_rate,
        bond_gain,
        mv_before: mv,
        mv_after: mv,
        liquidation: true,
    }
}

fn frozen(t: usize, liquidation: bool) -> YearOutcome {
    YearOutcome {
        t,
        crediting: None,
        pnl: 0.0,
        exit_rate: 0.0,
        bond_gain: 0.0,
        mv_before: 0.0,
        mv_after: 0.0,
        liquidation,
    }
}

fn check_par(c: f64, annuity: f64, zc_n: f64) -> Result<(), AlmError> {
    let price = c * annuity + zc_n;
    if (price - 1.0).abs() > PAR_TOL {
        return Err(AlmError::Invariant(format!("bond bought at {price} instead of par")));
    }
    Ok(())
}

fn check_crediting(o: &CreditingOutcome, params: &AlmParams, income: f64, t: usize) -> Result<(), AlmError> {
    let scale = 1e-12 * (1.0 + income.abs() + o.distributed.abs());
    if o.r_ph < params.r_g - 1e-15 {
        return Err(AlmError::Invariant(format!("t={t}: credited {} below guarantee", o.r_ph)));
    }
    if matches!(o.case, CreditingCase::A | CreditingCase::B)
        && o.distributed < params.pi_pr * (income + o.realized_gain).max(0.0) - scale
    {
        return Err(AlmError::Invariant(format!("t={t}: participation constraint violated")));
    }
    Ok(())
}

/// One year on a copy of `sheet`.
pub fn step_year(
    sheet: &BalanceSheet,
    market: &StepMarket<'_>,
    params: &AlmParams,
) -> Result<(BalanceSheet, YearOutcome), AlmError> {
    let mut next = sheet.clone();
    let out = step_in_place(&mut next, market, params, &mut Workspace::default())?;
    Ok((next, out))
}

/// Projects from `sheet` (at date `from`) to `to`, with `states[u]` the market
/// state at date `u`. Returns the sheet and outcome of every year in `(from, to]`.
pub fn project(
    sheet: &BalanceSheet,
    states: &[MarketState],
    shift: &ShiftCurve,
    table: &AffineTable,
    params: &AlmParams,
    to: usize,
) -> Result<Vec<(BalanceSheet, YearOutcome)>, AlmError> {
    let from = sheet.t;
    if to < from || to > params.horizon || to >= states.len() {
        return Err(AlmError::Param(format!("cannot project from {from} to {to}")));
    }
    let mut ws = Workspace::default();
    let mut cur = sheet.clone();
    let mut out = Vec::with_capacity(to - from);
    for state in &states[from + 1..=to] {
        let o = step_in_place(&mut cur, &StepMarket { state, shift, table }, params, &mut ws)?;
        out.push((cur.clone(), o));
    }
    Ok(out)
}
