use crate::{MarketError, MarketParams, ShiftCurve};

/// Affine coefficients of zero-coupon prices,
/// `P(t, t+i) = exp(−∫_t^{t+i} φ) · A(i) · exp(−B(i) x_t)`,
/// tabulated for integer maturities.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineTable {
    ln_a: Vec<f64>,
    b: Vec<f64>,
}

impl AffineTable {
    pub fn new(params: &MarketParams, max_maturity: usize) -> Result<Self, MarketError> {
        params.validate()?;
        let (k, theta, s2) = (params.k, params.theta, params.sigma_r * params.sigma_r);
        let mut ln_a = Vec::with_capacity(max_maturity + 1);
        let mut b = Vec::with_capacity(max_maturity + 1);
        for i in 0..=max_maturity {
            let tau = i as f64;
            let bi = -(-k * tau).exp_m1() / k;
            ln_a.push((theta - s2 / (2.0 * k * k)) * (bi - tau) - s2 * bi * bi / (4.0 * k));
            b.push(bi);
        }
        Ok(Self { ln_a, b })
    }

    pub fn max_maturity(&self) -> usize {
        self.b.len() - 1
    }

    pub fn ln_a(&self, i: usize) -> f64 {
        self.ln_a[i]
    }

    pub fn b(&self, i: usize) -> f64 {
        self.b[i]
    }

    /// `P(t, t+i)` given the factor value `x` at `t`.
    pub fn zc_price(&self, t: usize, x: f64, shift: &ShiftCurve, i: usize) -> Result<f64, MarketError> {
        self.check(i)?;
        Ok((self.ln_a[i] - self.b[i] * x - shift.integral(t, t + i)).exp())
    }

    /// `[P(t,t), P(t,t+1), …, P(t,t+n)]`.
    pub fn curve(&self, t: usize, x: f64, shift: &ShiftCurve, n: usize) -> Result<Vec<f64>, MarketError> {
        let mut out = Vec::with_capacity(n + 1);
        self.curve_into(t, x, shift, n, &mut out)?;
        Ok(out)
    }

    /// [`curve`](Self::curve) into a reused buffer.
    pub fn curve_into(&self, t: usize, x: f64, shift: &ShiftCurve, n: usize, out: &mut Vec<f64>) -> Result<(), MarketError> {
        self.check(n)?;
        out.clear();
        out.push(1.0);
        let mut cum = 0.0;
        for i in 1..=n {
            cum += shift.value(t + i - 1);
            out.push((self.ln_a[i] - self.b[i] * x - cum).exp());
        }
        Ok(())
    }

    fn check(&self, i: usize) -> Result<(), MarketError> {
        if i > self.max_maturity() {
            return Err(MarketError::Pricing(format!(
                "maturity {i} exceeds tabulated maximum {}",
                self.max_maturity()
            )));
        }
        Ok(())
    }
}

fn annuity(zc: &[f64], n: usize) -> Result<f64, MarketError> {
    if n == 0 || n >= zc.len() {
        return Err(MarketError::Pricing(format!(
            "maturity {n} outside curve of length {}",
            zc.len()
        )));
    }
    Ok(zc[1..=n].iter().sum())
}

/// Par rate of an `n`-year annual-coupon bond: `(1 − P_n) / Σ_{i≤n} P_i`.
/// `zc[i]` is the discount factor for `i` years.
pub fn swap_rate(zc: &[f64], n: usize) -> Result<f64, MarketError> {
    let a = annuity(zc, n)?;
    if !(a > 0.0) {
        return Err(MarketError::Pricing("non-positive annuity".into()));
    }
    Ok((1.0 - zc[n]) / a)
}

/// Value of a unit-nominal bond with `n` remaining annual coupons `c`.
pub fn bond_value(zc: &[f64], n: usize, c: f64) -> Result<f64, MarketError> {
    Ok(c * annuity(zc, n)? + zc[n])
}

/// Value of a unit-nominal portfolio split equally over residual maturities
/// `1..=coupons.len()`, where `coupons[i−1]` is the coupon of the bond
/// maturing in `i` years.
pub fn portfolio_value(zc: &[f64], coupons: &[f64]) -> Result<f64, MarketError> {
    let n = coupons.len();
    if n == 0 {
        return Err(MarketError::Pricing("empty portfolio".into()));
    }
    let mut total = 0.0;
    let mut ann = 0.0;
    for (i, c) in coupons.iter().enumerate() {
        let m = i + 1;
        if m >= zc.len() {
            return Err(MarketError::Pricing(format!("maturity {m} outside curve")));
        }
        ann += zc[m];
        total += c * ann + zc[m];
    }
    Ok(total / n as f64)
}

/// Shift that makes the model's time-0 curve match `zero_rates[i−1] = z_i`,
/// obtained by differencing `∫_0^i φ = i z_i + ln A(i) − B(i) x_0`. Beyond the
/// input curve the last annual value is extended flat.
pub fn calibrate_shift(params: &MarketParams, zero_rates: &[f64]) -> Result<ShiftCurve, MarketError> {
    let table = AffineTable::new(params, zero_rates.len())?;
    let mut values = Vec::with_capacity(zero_rates.len());
    let mut prev = 0.0;
    for (idx, z) in zero_rates.iter().enumerate() {
        let i = idx + 1;
        let cum = i as f64 * z + table.ln_a(i) - table.b(i) * params.x0;
        values.push(cum - prev);
        prev = cum;
    }
    let tail = values.last().copied().unwrap_or(0.0);
    ShiftCurve::new(values, tail)
}

/// Continuously compounded zero rates `z_i = −ln P_i / i`, `i = 1..`.
pub fn zero_rates(zc: &[f64]) -> Vec<f64> {
    zc.iter().enumerate().skip(1).map(|(i, p)| -p.ln() / i as f64).collect()
}
