use std::path::Path;

use crate::{MarketError, ShiftCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
}

/// Relative multipliers on zero rates, tabulated by maturity (years) and
/// interpolated linearly between table rows. Down multipliers are stored as
/// magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct RateShock {
    maturities: Vec<f64>,
    up: Vec<f64>,
    down: Vec<f64>,
}

const DEFAULT_TABLE: [(f64, f64, f64); 21] = [
    (1.0, 0.70, 0.75),
    (2.0, 0.70, 0.65),
    (3.0, 0.64, 0.56),
    (4.0, 0.59, 0.50),
    (5.0, 0.55, 0.46),
    (6.0, 0.52, 0.42),
    (7.0, 0.49, 0.39),
    (8.0, 0.47, 0.36),
    (9.0, 0.44, 0.33),
    (10.0, 0.42, 0.31),
    (11.0, 0.39, 0.30),
    (12.0, 0.37, 0.29),
    (13.0, 0.35, 0.28),
    (14.0, 0.34, 0.28),
    (15.0, 0.33, 0.27),
    (16.0, 0.31, 0.28),
    (17.0, 0.30, 0.28),
    (18.0, 0.29, 0.28),
    (19.0, 0.27, 0.29),
    (20.0, 0.26, 0.29),
    (90.0, 0.20, 0.20),
];

impl RateShock {
    pub fn new(maturities: Vec<f64>, up: Vec<f64>, down: Vec<f64>) -> Result<Self, MarketError> {
        if maturities.is_empty() || maturities.len() != up.len() || maturities.len() != down.len() {
            return Err(MarketError::Shock("table columns must be non-empty and of equal length".into()));
        }
        if maturities.iter().chain(&up).chain(&down).any(|v| !v.is_finite()) {
            return Err(MarketError::Shock("table entries must be finite".into()));
        }
        if !(maturities[0] > 0.0) || maturities.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MarketError::Shock("maturities must be positive and strictly increasing".into()));
        }
        Ok(Self { maturities, up, down })
    }

    /// Default relative shocks: 1–20 years, then linear to 20% at 90 years.
    pub fn standard() -> Self {
        let (m, (u, d)): (Vec<f64>, (Vec<f64>, Vec<f64>)) =
            DEFAULT_TABLE.iter().map(|&(m, u, d)| (m, (u, d))).unzip();
        Self::new(m, u, d).expect("default table is valid")
    }

    /// The same multiplier `m` at every maturity up to `max_maturity`.
    pub fn uniform(m: f64, max_maturity: usize) -> Result<Self, MarketError> {
        let mats: Vec<f64> = (1..=max_maturity.max(1)).map(|i| i as f64).collect();
        let n = mats.len();
        Self::new(mats, vec![m; n], vec![m; n])
    }

    /// All multipliers scaled by `factor` (0 gives the identity shock).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            maturities: self.maturities.clone(),
            up: self.up.iter().map(|v| v * factor).collect(),
            down: self.down.iter().map(|v| v * factor).collect(),
        }
    }

    /// Parses whitespace-separated `maturity up down` rows; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, MarketError> {
        let (mut m, mut u, mut d) = (Vec::new(), Vec::new(), Vec::new());
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(MarketError::Parse {
                    line: idx + 1,
                    message: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let mut vals = [0.0; 3];
            for (v, f) in vals.iter_mut().zip(&fields) {
                *v = f.parse().map_err(|_| MarketError::Parse {
                    line: idx + 1,
                    message: format!("not a number: {f:?}"),
                })?;
            }
            m.push(vals[0]);
            u.push(vals[1]);
            d.push(vals[2]);
        }
        Self::new(m, u, d)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MarketError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| MarketError::Shock(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Table rows as `(maturity, up, down)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.maturities
            .iter()
            .zip(&self.up)
            .zip(&self.down)
            .map(|((&m, &u), &d)| (m, u, d))
    }

    pub fn max_maturity(&self) -> f64 {
        *self.maturities.last().unwrap()
    }

    /// Multiplier at `maturity`, flat below the first row; error beyond the
    /// last row.
    pub fn multiplier(&self, maturity: f64, direction: Direction) -> Result<f64, MarketError> {
        let col = match direction {
            Direction::Up => &self.up,
            Direction::Down => &self.down,
        };
        if maturity > self.max_maturity() {
            return Err(MarketError::Shock(format!(
                "maturity {maturity} not covered by table (max {})",
                self.max_maturity()
            )));
        }
        let idx = self.maturities.partition_point(|&m| m < maturity);
        if idx == 0 {
            return Ok(col[0]);
        }
        if self.maturities[idx] == maturity {
            return Ok(col[idx]);
        }
        let (m0, m1) = (self.maturities[idx - 1], self.maturities[idx]);
        let w = (maturity - m0) / (m1 - m0);
        Ok(col[idx - 1] + w * (col[idx] - col[idx - 1]))
    }

    /// Shocked zero rate: `z(1+m)` up, `z(1−|m|)` down, without floor.
    pub fn shocked_rate(&self, z: f64, maturity: f64, direction: Direction) -> Result<f64, MarketError> {
        let m = self.multiplier(maturity, direction)?;
        Ok(match direction {
            Direction::Up => z * (1.0 + m),
            Direction::Down => z * (1.0 - m.abs()),
        })
    }
}

/// Shift increment, indexed in years from the shock date, that moves the zero
/// curve `zero_rates[i−1] = z_i` to its shocked value. Added to the model
/// shift from the shock date on, it reproduces `z̃_i` exactly since
/// `∫_t^{t+i} Δφ = i (z̃_i − z_i)`. Beyond the curve the last increment is
/// extended flat.
pub fn apply_rate_shock(zero_rates: &[f64], shock: &RateShock, direction: Direction) -> Result<ShiftCurve, MarketError> {
    let mut values = Vec::with_capacity(zero_rates.len());
    let mut prev = 0.0;
    for (idx, &z) in zero_rates.iter().enumerate() {
        let i = (idx + 1) as f64;
        let cum = i * (shock.shocked_rate(z, i, direction)? - z);
        values.push(cum - prev);
        prev = cum;
    }
    let tail = values.last().copied().unwrap_or(0.0);
    ShiftCurve::new(values, tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_coverage() {
        let s = RateShock::standard();
        assert_eq!(s.multiplier(1.0, Direction::Up).unwrap(), 0.70);
        assert_eq!(s.multiplier(0.5, Direction::Down).unwrap(), 0.75);
        assert!((s.multiplier(55.0, Direction::Up).unwrap() - 0.23).abs() < 1e-15);
        assert!((s.multiplier(2.5, Direction::Down).unwrap() - 0.605).abs() < 1e-15);
        assert!(s.multiplier(91.0, Direction::Up).is_err());
        assert!(apply_rate_shock(&vec![0.02; 95], &s, Direction::Up).is_err());
    }

    #[test]
    fn parse_table() {
        let s = RateShock::parse("# maturity up down\n1 0.5 0.4\n\n10 0.3 0.2 # long end\n").unwrap();
        assert_eq!(s.max_maturity(), 10.0);
        assert!((s.multiplier(5.5, Direction::Up).unwrap() - 0.4).abs() < 1e-15);
        for bad in ["1 0.5", "1 x 0.3", "2 0.1 0.1\n1 0.1 0.1", ""] {
            assert!(RateShock::parse(bad).is_err(), "{bad:?}");
        }
        match RateShock::parse("1 0.1 0.1\n2 0.1") {
            Err(MarketError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identity_and_flat_shocks() {
        let z = [0.01, 0.015, 0.02, 0.022];
        let zero = apply_rate_shock(&z, &RateShock::standard().scaled(0.0), Direction::Down).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0) && zero.tail() == 0.0);
        let up = apply_rate_shock(&[0.02; 30], &RateShock::uniform(0.5, 30).unwrap(), Direction::Up).unwrap();
        for i in 0..40 {
            assert!((up.value(i) - 0.01).abs() < 1e-15);
        }
    }

    #[test]
    fn down_shock_uses_magnitude() {
        let s = RateShock::new(vec![1.0], vec![-0.3], vec![-0.3]).unwrap();
        assert!((s.shocked_rate(0.02, 1.0, Direction::Down).unwrap() - 0.014).abs() < 1e-16);
        assert!((s.shocked_rate(0.02, 1.0, Direction::Up).unwrap() - 0.014).abs() < 1e-16);
    }
}
