//! Least-squares Monte-Carlo with indicator bases on hypercube partitions,
//! and greedy forward selection of regressors.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::EstimatorError;
use crate::estimator::{EstimatorReport, LevelRecord};
use crate::problem::{Aggregator, NestedProblem};
use crate::rng::{StreamKey, StreamRng};
use crate::stats::mean_var;

/// Largest number of cells a dense [`RegressionModel`] may hold.
pub const MAX_DENSE_CELLS: usize = 1 << 24;

/// Row-major `rows × cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, EstimatorError> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(EstimatorError::Dimension(format!(
                "{rows}×{cols} matrix needs {} values, got {}",
                rows.saturating_mul(cols),
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, EstimatorError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(EstimatorError::Dimension(format!(
                "ragged rows: expected {cols} columns, found {}",
                r.len()
            )));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    /// Sub-matrix made of the given columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let data = (0..self.rows)
            .flat_map(|i| cols.iter().map(move |&c| self.data[i * self.cols + c]))
            .collect();
        Self {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }
}

/// Uniform grid of `n_r^d` cells over a box.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubePartition {
    n_r: usize,
    bounds: Vec<(f64, f64)>,
    cells: u64,
}

impl HypercubePartition {
    pub fn new(n_r: usize, bounds: Vec<(f64, f64)>) -> Result<Self, EstimatorError> {
        if n_r == 0 || bounds.is_empty() {
            return Err(EstimatorError::Config("partition needs n_r ≥ 1 and d ≥ 1".into()));
        }
        if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
            return Err(EstimatorError::Config(format!("invalid axis bounds ({lo}, {hi})")));
        }
        let cells = (n_r as u64)
            .checked_pow(bounds.len() as u32)
            .ok_or_else(|| EstimatorError::Config(format!("{n_r}^{} cells overflow", bounds.len())))?;
        Ok(Self { n_r, bounds, cells })
    }

    /// Partition whose bounds are the per-column sample range expanded by 1%.
    pub fn from_sample(features: &Matrix, n_r: usize) -> Result<Self, EstimatorError> {
        if features.rows() == 0 {
            return Err(EstimatorError::Dimension("empty feature sample".into()));
        }
        let bounds = (0..features.cols())
            .map(|c| {
                let col = features.column(c);
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let pad = if hi > lo { 0.01 * (hi - lo) } else { 0.01 * lo.abs().max(1.0) };
                (lo - pad, hi + pad)
            })
            .collect();
        Self::new(n_r, bounds)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Total number of cells `N_r = n_r^d`.
    pub fn cells(&self) -> u64 {
        self.cells
    }

    fn axis_index(&self, axis: usize, x: f64) -> u64 {
        let (lo, hi) = self.bounds[axis];
        let t = (x - lo) / (hi - lo);
        let i = (self.n_r as f64 * t).floor();
        if i.is_nan() || i < 0.0 {
            0
        } else {
            (i as u64).min(self.n_r as u64 - 1)
        }
    }

    /// Cell of `x`; points outside the box fall into boundary cells. Axis 0
    /// is the fastest-varying digit.
    pub fn locate(&self, x: &[f64]) -> u64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut idx = 0u64;
        for axis in (0..self.dim()).rev() {
            idx = idx * self.n_r as u64 + self.axis_index(axis, x[axis]);
        }
        idx
    }

    /// Whether `x` lies in cell `cell`, boundary cells extending to infinity.
    pub fn contains(&self, cell: u64, x: &[f64]) -> bool {
        let n = self.n_r as u64;
        let mut rest = cell;
        for (axis, &(lo, hi)) in self.bounds.iter().enumerate() {
            let i = rest % n;
            rest /= n;
            let t = self.n_r as f64 * (x[axis] - lo) / (hi - lo);
            let above = i == 0 || t >= i as f64;
            let below = i + 1 == n || t < (i + 1) as f64;
            if !(above && below) {
                return false;
            }
        }
        rest == 0
    }
}

/// Fitted cell coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    partition: HypercubePartition,
    p: usize,
    alpha: Vec<f64>,
    gamma: Vec<f64>,
    counts: Vec<u64>,
}

impl RegressionModel {
    pub fn partition(&self) -> &HypercubePartition {
        &self.partition
    }

    /// `α̂` of one cell, a row of `P` values.
    pub fn alpha(&self, cell: usize) -> &[f64] {
        &self.alpha[cell * self.p..(cell + 1) * self.p]
    }

    /// `γ̂_n = max_p α̂ᵖ_n` for every cell.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Fitted conditional means at `x`.
    pub fn predict(&self, x: &[f64]) -> &[f64] {
        self.alpha(self.partition.locate(x) as usize)
    }
}

/// Cell-mean regression of each target column on the partition indicators;
/// empty cells get coefficient 0.
pub fn fit_indicator_regression(
    features: &Matrix,
    targets: &Matrix,
    partition: &HypercubePartition,
) -> Result<RegressionModel, EstimatorError> {
    if features.rows() == 0 || features.rows() != targets.rows() {
        return Err(EstimatorError::Dimension(format!(
            "features have {} rows, targets {}",
            features.rows(),
            targets.rows()
        )));
    }
    if features.cols() != partition.dim() {
        return Err(EstimatorError::Dimension(format!(
            "features have {} columns, partition dimension is {}",
            features.cols(),
            partition.dim()
        )));
    }
    if partition.cells() > MAX_DENSE_CELLS as u64 {
        return Err(EstimatorError::Config(format!(
            "partition has {} cells, more than the dense limit {MAX_DENSE_CELLS}",
            partition.cells()
        )));
    }
    let n = partition.cells() as usize;
    let p = targets.cols();
    let mut alpha = vec![0.0; n * p];
    let mut counts = vec![0u64; n];
    for i in 0..features.rows() {
        let cell = partition.locate(features.row(i)) as usize;
        counts[cell] += 1;
        for (a, t) in alpha[cell * p..(cell + 1) * p].iter_mut().zip(targets.row(i)) {
            *a += t;
        }
    }
    for (cell, &c) in counts.iter().enumerate() {
        if c > 0 {
            alpha[cell * p..(cell + 1) * p].iter_mut().for_each(|a| *a /= c as f64);
        }
    }
    let gamma = (0..n)
        .map(|cell| {
            let row = &alpha[cell * p..(cell + 1) * p];
            row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    Ok(RegressionModel {
        partition: partition.clone(),
        p,
        alpha,
        gamma,
        counts,
    })
}

/// How the partition of an LSMC run is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionSpec {
    Fixed(HypercubePartition),
    /// `n_r` cells per axis over the expanded range of the sampled features.
    Empirical { n_r: usize },
}

/// Single-draw training sample of an LSMC run.
#[derive(Debug, Clone)]
pub struct LsmcSample {
    pub features: Matrix,
    pub targets: Matrix,
    pub weights: Vec<f64>,
}

/// Draws `J` outer scenarios with one inner draw each. Scenario `j` uses the
/// same streams as scenario `j` of level 0 in the nested estimators.
pub fn lsmc_sample<P, F>(problem: &P, feature_map: &F, j: usize, seed: u64) -> Result<LsmcSample, EstimatorError>
where
    P: NestedProblem,
    F: Fn(&P::Outer) -> Vec<f64> + Sync,
{
    if j == 0 {
        return Err(EstimatorError::Config("J must be positive".into()));
    }
    let p = problem.components();
    let rows: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..j)
        .into_par_iter()
        .map(|s| {
            let mut rng = StreamRng::new(StreamKey::outer(seed, 0, s as u64));
            let outer = problem.sample_outer(&mut rng)?;
            let mut y = vec![0.0; p];
            let mut rng = StreamRng::new(StreamKey::new(seed, 0, s as u64, 0));
            problem.sample_inner(&outer, &mut rng, &mut y)?;
            Ok((feature_map(&outer), y, problem.weight(&outer)))
        })
        .collect::<Result<_, EstimatorError>>()?;
    let d = rows[0].0.len();
    if d == 0 || rows.iter().any(|r| r.0.len() != d) {
        return Err(EstimatorError::Dimension("feature map must return a fixed non-zero length".into()));
    }
    let mut features = Vec::with_capacity(j * d);
    let mut targets = Vec::with_capacity(j * p);
    let mut weights = Vec::with_capacity(j);
    for (f, y, w) in rows {
        features.extend(f);
        targets.extend(y);
        weights.push(w);
    }
    Ok(LsmcSample {
        features: Matrix::new(j, d, features)?,
        targets: Matrix::new(j, p, targets)?,
        weights,
    })
}

/// LSMC estimates `(1/J) Σ_j φ(X_j) h(α̂(X_j))` for each aggregator, with the
/// model fitted and evaluated on the same sample.
pub fn lsmc_estimate_multi<P, F>(
    problem: &P,
    aggs: &[Aggregator],
    feature_map: &F,
    j: usize,
    partition: &PartitionSpec,
    seed: u64,
) -> Result<Vec<EstimatorReport>, EstimatorError>
where
    P: NestedProblem,
    F: Fn(&P::Outer) -> Vec<f64> + Sync,
{
    let sample = lsmc_sample(problem, feature_map, j, seed)?;
    let partition = match partition {
        PartitionSpec::Fixed(p) => p.clone(),
        PartitionSpec::Empirical { n_r } => HypercubePartition::from_sample(&sample.features, *n_r)?,
    };
    let model = fit_indicator_regression(&sample.features, &sample.targets, &partition)?;
    let hint = problem.inner_cost_hint();
    let cells: Vec<usize> = (0..j).map(|i| partition.locate(sample.features.row(i)) as usize).collect();
    let mut weight_sums = vec![0.0; model.counts().len()];
    for (&c, &w) in cells.iter().zip(&sample.weights) {
        weight_sums[c] += w;
    }
    Ok(aggs
        .iter()
        .map(|agg| {
            // Per-cell weight mean times the aggregate's gradient at α̂.
            let loadings: Vec<Vec<f64>> = (0..model.counts().len())
                .map(|c| {
                    let n = model.counts()[c];
                    if n == 0 {
                        return Vec::new();
                    }
                    let w_bar = weight_sums[c] / n as f64;
                    gradient(agg, model.alpha(c)).into_iter().map(|g| w_bar * g).collect()
                })
                .collect();
            // Linearized summands: their mean is the estimate and their
            // variance includes the noise of the fitted coefficients.
            let values: Vec<f64> = (0..j)
                .map(|i| {
                    let c = cells[i];
                    let alpha = model.alpha(c);
                    let noise: f64 = loadings[c]
                        .iter()
                        .zip(sample.targets.row(i))
                        .zip(alpha)
                        .map(|((l, y), a)| l * (y - a))
                        .sum();
                    sample.weights[i] * agg.apply(alpha) + noise
                })
                .collect();
            let plain: Vec<f64> = (0..j).map(|i| sample.weights[i] * agg.apply(model.alpha(cells[i]))).collect();
            let (mean, _) = mean_var(&plain);
            let (_, variance) = mean_var(&values);
            EstimatorReport {
                label: format!("lsmc/{}", agg.label()),
                value: mean,
                std_error: (variance / j as f64).sqrt(),
                total_cost: j as f64 * hint,
                levels: vec![LevelRecord {
                    level: 0,
                    j,
                    k: 1,
                    mean,
                    variance,
                }],
                seed,
            }
        })
        .collect())
}

/// Central finite-difference gradient of `agg` at `x`.
fn gradient(agg: &Aggregator, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|p| {
            let step = 1e-7 * x[p].abs().max(1.0);
            probe[p] = x[p] + step;
            let up = agg.apply(&probe);
            probe[p] = x[p] - step;
            let down = agg.apply(&probe);
            probe[p] = x[p];
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Single-aggregator form of [`lsmc_estimate_multi`].
pub fn lsmc_estimate<P, F>(
    problem: &P,
    agg: &Aggregator,
    feature_map: &F,
    j: usize,
    partition: &PartitionSpec,
    seed: u64,
) -> Result<EstimatorReport, EstimatorError>
where
    P: NestedProblem,
    F: Fn(&P::Outer) -> Vec<f64> + Sync,
{
    let mut r = lsmc_estimate_multi(problem, std::slice::from_ref(agg), feature_map, j, partition, seed)?;
    Ok(r.remove(0))
}

/// Per-scenario nested values `h(Ê_K)` for the given outer samples. Scenario
/// `j` draws from streams `(seed, 0, j, ·)`.
pub fn nested_targets<P: NestedProblem>(
    problem: &P,
    agg: &Aggregator,
    scenarios: &[P::Outer],
    k: usize,
    seed: u64,
) -> Result<Vec<f64>, EstimatorError> {
    if k == 0 {
        return Err(EstimatorError::Config("K must be positive".into()));
    }
    let p = problem.components();
    scenarios
        .par_iter()
        .enumerate()
        .map(|(j, outer)| {
            let mut draw = vec![0.0; p];
            let mut sum = vec![0.0; p];
            for d in 0..k {
                let mut rng = StreamRng::new(StreamKey::new(seed, 0, j as u64, d as u64));
                problem.sample_inner(outer, &mut rng, &mut draw)?;
                sum.iter_mut().zip(&draw).for_each(|(s, y)| *s += y);
            }
            sum.iter_mut().for_each(|s| *s /= k as f64);
            Ok(agg.apply(&sum))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub ordered_features: Vec<usize>,
    pub rmse_path: Vec<f64>,
}

/// In-sample RMSE of the cell-mean regression of `targets` on the given
/// feature columns, with `n_r` cells per axis over the expanded sample range.
pub fn regression_rmse(features: &Matrix, targets: &[f64], cols: &[usize], n_r: usize) -> Result<f64, EstimatorError> {
    let sub = features.select_columns(cols);
    let partition = HypercubePartition::from_sample(&sub, n_r)?;
    let cells: Vec<u64> = (0..sub.rows()).map(|i| partition.locate(sub.row(i))).collect();
    let mut acc: HashMap<u64, (f64, u64)> = HashMap::new();
    for (c, t) in cells.iter().zip(targets) {
        let e = acc.entry(*c).or_insert((0.0, 0));
        e.0 += t;
        e.1 += 1;
    }
    let sse: f64 = cells
        .iter()
        .zip(targets)
        .map(|(c, t)| {
            let (s, n) = acc[c];
            let r = t - s / n as f64;
            r * r
        })
        .sum();
    Ok((sse / targets.len() as f64).sqrt())
}

/// Greedy forward selection: each step adds the unused feature whose
/// regression (together with the already selected ones) has the lowest
/// in-sample RMSE; ties go to the lowest index.
pub fn forward_select(features: &Matrix, targets: &[f64], n_r: usize, max_vars: usize) -> Result<SelectionResult, EstimatorError> {
    let f = features.cols();
    if f == 0 || features.rows() == 0 {
        return Err(EstimatorError::Dimension("no features to select from".into()));
    }
    if features.rows() != targets.len() {
        return Err(EstimatorError::Dimension(format!(
            "{} feature rows but {} targets",
            features.rows(),
            targets.len()
        )));
    }
    if max_vars == 0 || max_vars > f {
        return Err(EstimatorError::Config(format!("max_vars must lie in 1..={f}, got {max_vars}")));
    }
    let mut selected: Vec<usize> = Vec::with_capacity(max_vars);
    let mut rmse_path = Vec::with_capacity(max_vars);
    for _ in 0..max_vars {
        let candidates: Vec<usize> = (0..f).filter(|c| !selected.contains(c)).collect();
        let scores: Vec<f64> = candidates
            .par_iter()
            .map(|&c| {
                let mut cols = selected.clone();
                cols.push(c);
                regression_rmse(features, targets, &cols, n_r)
            })
            .collect::<Result<_, _>>()?;
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if *s < scores[best] {
                best = i;
            }
        }
        selected.push(candidates[best]);
        rmse_path.push(scores[best]);
    }
    Ok(SelectionResult {
        ordered_features: selected,
        rmse_path,
    })
}
