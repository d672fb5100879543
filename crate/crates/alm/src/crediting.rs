//! Crediting-rate waterfall.

/// Which branch of the waterfall served the credited rate, from best to worst.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CreditingCase {
    /// Target served from income and released reserve; any latent loss realized.
    A,
    /// Target served by realizing part of the latent gain (or only part of the loss).
    B,
    /// Target out of reach; all latent gain realized and everything distributed.
    C,
    /// Guaranteed rate out of reach; reserve cleared, shortfall borne by the shareholder.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CreditingInput {
    /// Reserve of remaining policyholders, `MR_{t−1}(1 − p^e)`.
    pub mr_base: f64,
    /// Financial income: coupons plus realized stock gains of the period.
    pub income: f64,
    pub psr: f64,
    /// Market minus book value of the equity position.
    pub latent_gain: f64,
    pub r_g: f64,
    pub r_comp: f64,
    pub pi_pr: f64,
    /// Fraction of the reserve released towards the target.
    pub rho_bar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CreditingOutcome {
    pub case: CreditingCase,
    pub r_ph: f64,
    /// Amount credited to remaining policyholders, `mr_base · r_ph`.
    pub distributed: f64,
    /// Latent stock gain (negative: loss) realized by the waterfall.
    pub realized_gain: f64,
    pub psr: f64,
    pub margin: f64,
    /// Period P&L: margin, reserve interest and bond losses beyond the reserve.
    pub pnl: f64,
}

/// Runs the waterfall. The target rate is the largest of the guaranteed
/// rate, the competitor rate and the rate meeting the participation
/// constraint.
pub fn credit(c: &CreditingInput) -> CreditingOutcome {
    let gain = c.income.max(0.0);
    let margin0 = (1.0 - c.pi_pr) * gain;
    let avail0 = c.income - margin0 + c.rho_bar * c.psr;
    let kept_psr = (1.0 - c.rho_bar) * c.psr;
    if !(c.mr_base > 0.0) {
        // Nobody left to credit: income goes to the shareholder, reserve kept.
        return finish(c, CreditingCase::A, c.r_g.max(c.r_comp), 0.0, 0.0, c.psr);
    }
    let r_part = c.pi_pr * gain / c.mr_base;
    let r_tgt = c.r_g.max(c.r_comp).max(r_part);
    let need = c.mr_base * r_tgt;
    let floor = c.mr_base * c.r_g;
    let lg = c.latent_gain;
    if lg < 0.0 {
        if avail0 + lg >= need {
            return finish(c, CreditingCase::A, r_tgt, need, lg, kept_psr + avail0 + lg - need);
        }
        if avail0 >= need {
            return finish(c, CreditingCase::B, r_tgt, need, need - avail0, kept_psr);
        }
        if avail0 >= floor {
            return finish(c, CreditingCase::C, avail0 / c.mr_base, avail0, 0.0, kept_psr);
        }
    } else {
        if avail0 >= need {
            return finish(c, CreditingCase::A, r_tgt, need, 0.0, kept_psr + avail0 - need);
        }
        if avail0 + lg >= need {
            return finish(c, CreditingCase::B, r_tgt, need, need - avail0, kept_psr);
        }
        if avail0 + lg >= floor {
            return finish(c, CreditingCase::C, (avail0 + lg) / c.mr_base, avail0 + lg, lg, kept_psr);
        }
    }
    let realized = lg.max(0.0);
    let r_ph = c.r_g.max(c.pi_pr * (c.income + realized).max(0.0) / c.mr_base);
    finish(c, CreditingCase::D, r_ph, c.mr_base * r_ph, realized, 0.0)
}

fn finish(
    c: &CreditingInput,
    case: CreditingCase,
    r_ph: f64,
    distributed: f64,
    realized_gain: f64,
    psr: f64,
) -> CreditingOutcome {
    let margin = c.income + realized_gain + c.psr - psr - distributed;
    CreditingOutcome {
        case,
        r_ph,
        distributed,
        realized_gain,
        psr,
        margin,
        pnl: margin,
    }
}
