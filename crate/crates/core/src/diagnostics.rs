//! Summary statistics over weightings and bandit trajectories.

use alloc::vec;
use alloc::vec::Vec;

use crate::bandit::Trajectory;
use crate::ensemble::WeightVector;
use crate::{Error, Result};

/// Mean absolute deviation of the weights from uniform:
/// `D = (1/K) * sum_k |w_k - 1/K|`.
///
/// `D` is 0 for uniform weights and reaches `2(K-1)/K^2` at a vertex of the simplex.
pub fn summary_stat(weights: &WeightVector) -> f64 {
    let k = weights.k() as f64;
    let uniform = 1.0 / k;
    weights
        .as_slice()
        .iter()
        .map(|w| libm::fabs(w - uniform))
        .sum::<f64>()
        / k
}

/// Largest possible value of [`summary_stat`] for `k` subsets.
pub fn summary_stat_max(k: usize) -> f64 {
    let k = k as f64;
    2.0 * (k - 1.0) / (k * k)
}

/// Share of each subset in a training set, from per-subset row counts.
pub fn composition_weights(counts: &[usize]) -> Result<WeightVector> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidParameter {
            name: "counts",
            reason: "total must be positive",
        });
    }
    let total = total as f64;
    let mut weights: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let residue = 1.0 - weights.iter().sum::<f64>();
    if residue != 0.0 {
        let top = crate::ensemble::argmax_lowest(&weights);
        weights[top] += residue;
    }
    WeightVector::new(weights)
}

/// How many iterations pulled each arm.
pub fn occurrence_table(trajectory: &Trajectory) -> Vec<usize> {
    let mut counts = vec![0; trajectory.k()];
    for record in &trajectory.records {
        counts[record.arm] += 1;
    }
    counts
}

/// Average ranks, ties sharing the mean of their positions (1-based).
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; `None` when either input has no spread.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    pearson(&ranks(x), &ranks(y))
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / libm::sqrt(sxx * syy))
}
