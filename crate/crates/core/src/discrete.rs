//! Finite test problem whose nested expectations can be enumerated exactly.
//!
//! `X` takes finitely many values; given `X = i`, `Y` takes finitely many
//! joint values in `ℝᴾ`. The exact value `I` and the exact expectation of the
//! nested estimator at any `K` are available by enumeration, which makes the
//! problem an oracle for the estimators.

use rand::Rng;

use crate::error::{EstimatorError, SampleError};
use crate::problem::{Aggregator, NestedProblem};
use crate::rng::StreamRng;

/// One atom of the outer law.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterAtom {
    pub prob: f64,
    /// Feature value used by regression estimators.
    pub value: f64,
    pub weight: f64,
    /// Inner law given this atom: `(probability, Y)` pairs.
    pub inner: Vec<(f64, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteProblem {
    atoms: Vec<OuterAtom>,
    p: usize,
}

fn check_probs(probs: impl Iterator<Item = f64>, what: &str) -> Result<(), EstimatorError> {
    let mut total = 0.0;
    for q in probs {
        if !(q > 0.0 && q <= 1.0) {
            return Err(EstimatorError::Config(format!("{what} probability {q} outside (0, 1]")));
        }
        total += q;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(EstimatorError::Config(format!("{what} probabilities sum to {total}")));
    }
    Ok(())
}

fn pick<T>(items: &[T], prob: impl Fn(&T) -> f64, u: f64) -> usize {
    let mut acc = 0.0;
    for (i, it) in items.iter().enumerate() {
        acc += prob(it);
        if u < acc {
            return i;
        }
    }
    items.len() - 1
}

impl DiscreteProblem {
    pub fn new(atoms: Vec<OuterAtom>) -> Result<Self, EstimatorError> {
        let p = atoms
            .first()
            .and_then(|a| a.inner.first())
            .map(|(_, y)| y.len())
            .ok_or_else(|| EstimatorError::Config("outer and inner laws must be non-empty".into()))?;
        if p == 0 {
            return Err(EstimatorError::Config("P must be positive".into()));
        }
        check_probs(atoms.iter().map(|a| a.prob), "outer")?;
        for a in &atoms {
            check_probs(a.inner.iter().map(|(q, _)| *q), "inner")?;
            if a.inner.iter().any(|(_, y)| y.len() != p) {
                return Err(EstimatorError::Dimension(format!("every inner atom must have {p} components")));
            }
        }
        Ok(Self { atoms, p })
    }

    /// Three outer atoms, three inner atoms, `P = 3`, with conditional means
    /// that are close to a tie for some atoms so that the nested estimator of
    /// the maximum has a visible bias.
    pub fn example() -> Self {
        let atoms = vec![
            OuterAtom {
                prob: 0.3,
                value: 0.0,
                weight: 1.0,
                inner: vec![
                    (0.2, vec![2.0, -1.0, 0.0]),
                    (0.5, vec![-1.0, 1.0, 0.0]),
                    (0.3, vec![0.5, 0.0, 0.0]),
                ],
            },
            OuterAtom {
                prob: 0.45,
                value: 1.0,
                weight: 0.8,
                inner: vec![
                    (0.4, vec![1.0, 3.0, 0.0]),
                    (0.4, vec![0.0, -2.0, 0.0]),
                    (0.2, vec![-1.0, 0.0, 0.0]),
                ],
            },
            OuterAtom {
                prob: 0.25,
                value: 2.0,
                weight: 1.5,
                inner: vec![
                    (0.25, vec![-2.0, -1.0, 0.0]),
                    (0.5, vec![0.0, 0.5, 0.0]),
                    (0.25, vec![1.0, -1.0, 0.0]),
                ],
            },
        ];
        Self::new(atoms).expect("example problem is well formed")
    }

    pub fn atoms(&self) -> &[OuterAtom] {
        &self.atoms
    }

    /// `E[Y | X = atom]`.
    pub fn conditional_means(&self, atom: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.p];
        for (q, y) in &self.atoms[atom].inner {
            for (mi, yi) in m.iter_mut().zip(y) {
                *mi += q * yi;
            }
        }
        m
    }

    /// `I = Σ_i P(X = i) φ(i) h(E[Y | X = i])`.
    pub fn exact_value(&self, agg: &Aggregator) -> f64 {
        (0..self.atoms.len())
            .map(|i| self.atoms[i].prob * self.atoms[i].weight * agg.apply(&self.conditional_means(i)))
            .sum()
    }

    /// `E[h(Ê_K) | X = atom]`, enumerating the multinomial counts of the
    /// inner atoms among `K` draws.
    pub fn expected_conditional_aggregate(&self, atom: usize, agg: &Aggregator, k: usize) -> f64 {
        assert!(k >= 1, "K must be positive");
        let inner = &self.atoms[atom].inner;
        let ln_fact: Vec<f64> = std::iter::once(0.0)
            .chain((1..=k).scan(0.0, |acc, n| {
                *acc += (n as f64).ln();
                Some(*acc)
            }))
            .collect();
        let mut counts = vec![0usize; inner.len()];
        let mut means = vec![0.0; self.p];
        let mut total = 0.0;
        enumerate_counts(&mut counts, 0, k, &mut |c: &[usize]| {
            let mut ln_p = ln_fact[k];
            for (n, (q, _)) in c.iter().zip(inner) {
                ln_p += *n as f64 * q.ln() - ln_fact[*n];
            }
            means.iter_mut().for_each(|m| *m = 0.0);
            for (n, (_, y)) in c.iter().zip(inner) {
                let w = *n as f64 / k as f64;
                for (m, yi) in means.iter_mut().zip(y) {
                    *m += w * yi;
                }
            }
            total += ln_p.exp() * agg.apply(&means);
        });
        total
    }

    /// Exact expectation of the nested estimator with `K` inner draws.
    pub fn expected_nested(&self, agg: &Aggregator, k: usize) -> f64 {
        (0..self.atoms.len())
            .map(|i| self.atoms[i].prob * self.atoms[i].weight * self.expected_conditional_aggregate(i, agg, k))
            .sum()
    }
}

fn enumerate_counts(counts: &mut [usize], idx: usize, remaining: usize, visit: &mut impl FnMut(&[usize])) {
    if idx + 1 == counts.len() {
        counts[idx] = remaining;
        visit(counts);
        return;
    }
    for n in 0..=remaining {
        counts[idx] = n;
        enumerate_counts(counts, idx + 1, remaining - n, visit);
    }
}

impl NestedProblem for DiscreteProblem {
    type Outer = usize;

    fn components(&self) -> usize {
        self.p
    }

    fn sample_outer(&self, rng: &mut StreamRng) -> Result<usize, SampleError> {
        Ok(pick(&self.atoms, |a| a.prob, rng.random::<f64>()))
    }

    fn sample_inner(&self, outer: &usize, rng: &mut StreamRng, out: &mut [f64]) -> Result<(), SampleError> {
        let inner = &self.atoms[*outer].inner;
        let a = pick(inner, |(q, _)| *q, rng.random::<f64>());
        out.copy_from_slice(&inner[a].1);
        Ok(())
    }

    fn weight(&self, outer: &usize) -> f64 {
        self.atoms[*outer].weight
    }

    fn exact_conditional_means(&self, outer: &usize) -> Option<Vec<f64>> {
        Some(self.conditional_means(*outer))
    }
}
