//! Deterministic reductions.

const PAIRWISE_BLOCK: usize = 64;

/// Pairwise (cascade) summation with a fixed reduction tree: the result only
/// depends on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample mean and unbiased sample variance (zero for fewer than two values).
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    (m, pairwise_sum(&dev) / (xs.len() - 1) as f64)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of `log(ys)` against `log(xs)`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    ols_slope(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mean_var_small() {
        assert_eq!(mean_var(&[]), (0.0, 0.0));
        assert_eq!(mean_var(&[2.0]), (2.0, 0.0));
        let (m, v) = mean_var(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((v - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((log_log_slope(&xs, &ys) + 1.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn pairwise_matches_naive(xs in proptest::collection::vec(-1e3f64..1e3, 0..500)) {
            let naive: f64 = xs.iter().sum();
            let scale: f64 = xs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
            prop_assert!((pairwise_sum(&xs) - naive).abs() <= 1e-12 * scale);
        }
    }
}
