//! Random search over Dirichlet weightings of the source subsets.
//!
//! Each trial draws `w ~ Dirichlet(1_K)`, turns it into per-subset row counts
//! that sum to `n_training`, draws those rows from each subset, fits the learner
//! on the resulting subsample and scores it on the target. The weighting with
//! the lowest target loss wins; every trial is kept for plotting.

use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::learner::{Learner, LossValue};
use crate::partition::Partition;
use crate::rng::SeedStream;
use crate::{Error, Result};

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

/// Allowed deviation of the weight sum from one.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "need at least one subset",
            });
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "each weight must lie in [0, 1]",
            });
        }
        let sum: f64 = weights.iter().sum();
        if libm::fabs(sum - 1.0) > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "weights must sum to one",
            });
        }
        Ok(WeightVector(weights))
    }

    pub fn uniform(k: usize) -> Self {
        WeightVector(vec![1.0 / k as f64; k])
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Index of the largest weight (lowest index on ties).
    pub fn argmax(&self) -> usize {
        argmax_lowest(&self.0)
    }
}

pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Dirichlet(1, ..., 1): `k` unit exponentials normalized by their sum.
pub fn sample_dirichlet(k: usize, rng: &mut SeedStream) -> Result<WeightVector> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: "must be at least 1",
        });
    }
    let draws: Vec<f64> = (0..k).map(|_| rng.exponential()).collect();
    let total: f64 = draws.iter().sum();
    let mut weights: Vec<f64> = draws.iter().map(|e| e / total).collect();
    // put the rounding residue on the largest weight so the sum is one to within an ulp
    let residue = 1.0 - weights.iter().sum::<f64>();
    let top = argmax_lowest(&weights);
    weights[top] = (weights[top] + residue).clamp(0.0, 1.0);
    WeightVector::new(weights)
}

/// Remainders closer than this are treated as tied.
const REMAINDER_TIE: f64 = 1e-9;

/// Largest-remainder rounding of `n_training * w_k`: floors first, then the
/// leftover units go to the largest fractional parts, lowest index first on ties.
pub fn allocate_counts(weights: &WeightVector, n_training: usize) -> Vec<usize> {
    let n = n_training as f64;
    let quotas: Vec<f64> = weights
        .as_slice()
        .iter()
        .map(|w| {
            let q = n * w;
            let r = libm::round(q);
            if libm::fabs(q - r) < REMAINDER_TIE {
                r
            } else {
                q
            }
        })
        .collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| libm::floor(*q) as usize).collect();
    let mut remainders: Vec<f64> = quotas.iter().zip(&counts).map(|(q, &c)| q - c as f64).collect();
    let assigned: usize = counts.iter().sum();
    for _ in 0..n_training.saturating_sub(assigned) {
        let mut best = 0;
        for (i, &r) in remainders.iter().enumerate() {
            if r > remainders[best] + REMAINDER_TIE {
                best = i;
            }
        }
        counts[best] += 1;
        remainders[best] = f64::NEG_INFINITY;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Replacement {
    /// Without replacement unless a subset has fewer rows than requested.
    #[default]
    WhenShort,
    Always,
}

/// Draws `counts[k]` rows from subset `k` for every `k`, concatenated in subset
/// order. Returns source row indices.
pub fn stratified_subsample(
    partition: &Partition,
    counts: &[usize],
    replacement: Replacement,
    rng: &mut SeedStream,
) -> Result<Vec<usize>> {
    if counts.len() != partition.k() {
        return Err(Error::DimensionMismatch {
            context: "count vector length",
            expected: partition.k(),
            found: counts.len(),
        });
    }
    let mut rows = Vec::with_capacity(counts.iter().sum());
    for (k, &count) in counts.iter().enumerate() {
        let members = partition.members(k);
        if count == 0 {
            continue;
        }
        if replacement == Replacement::WhenShort && count <= members.len() {
            // partial Fisher-Yates
            let mut pool = members.to_vec();
            for i in 0..count {
                let j = i + rng.index(pool.len() - i);
                pool.swap(i, j);
            }
            rows.extend_from_slice(&pool[..count]);
        } else {
            rows.extend((0..count).map(|_| members[rng.index(members.len())]));
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    /// Number of Dirichlet draws `J`.
    pub trials: usize,
    pub n_training: usize,
    pub seed: u64,
    pub replacement: Replacement,
    /// When set, this fraction of the target is held out: trials are scored on
    /// the rest and only the winning model is scored on the held-out rows.
    pub holdout_fraction: Option<f64>,
}

impl EnsembleConfig {
    pub fn new(trials: usize, n_training: usize, seed: u64) -> Self {
        EnsembleConfig {
            trials,
            n_training,
            seed,
            replacement: Replacement::WhenShort,
            holdout_fraction: None,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                reason: "must be at least 1",
            });
        }
        if self.n_training < k {
            return Err(Error::InvalidParameter {
                name: "n_training",
                reason: "must be at least the number of subsets",
            });
        }
        if let Some(f) = self.holdout_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidParameter {
                    name: "holdout_fraction",
                    reason: "must lie strictly between 0 and 1",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub index: usize,
    pub weights: WeightVector,
    pub counts: Vec<usize>,
    /// Target loss, or the learner error that aborted this trial.
    pub outcome: core::result::Result<LossValue, Error>,
}

impl Trial {
    pub fn loss(&self) -> Option<LossValue> {
        self.outcome.as_ref().ok().copied()
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleResult<M> {
    pub trials: Vec<Trial>,
    pub best_index: usize,
    pub best_model: M,
    /// Loss of the best model on the held-out target rows, when a holdout was requested.
    pub holdout_loss: Option<LossValue>,
}

impl<M> EnsembleResult<M> {
    pub fn best_trial(&self) -> &Trial {
        &self.trials[self.best_index]
    }

    pub fn best_weights(&self) -> &WeightVector {
        &self.trials[self.best_index].weights
    }

    pub fn best_loss(&self) -> LossValue {
        self.best_trial().loss().expect("best trial succeeded")
    }
}

/// Splits target rows into (selection, holdout).
fn holdout_split(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let held = libm::round(fraction * n as f64) as usize;
    if held == 0 || held >= n {
        return Err(Error::InvalidParameter {
            name: "holdout_fraction",
            reason: "leaves an empty selection or holdout set",
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    SeedStream::derived(seed, "ensemble-holdout", 0).shuffle(&mut order);
    let mut holdout = order[..held].to_vec();
    let mut selection = order[held..].to_vec();
    holdout.sort_unstable();
    selection.sort_unstable();
    Ok((selection, holdout))
}

/// Runs `config.trials` independent trials. Trial `j` draws all of its
/// randomness from `derive_seed(config.seed, "ensemble-trial", j)`.
pub fn run_ensemble<L: Learner>(
    target: &Dataset,
    source: &Dataset,
    partition: &Partition,
    learner: &L,
    config: &EnsembleConfig,
) -> Result<EnsembleResult<L::Model>> {
    config.validate(partition.k())?;
    if target.n_rows() == 0 {
        return Err(Error::EmptyTarget);
    }
    if partition.len() != source.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "partition length",
            expected: source.n_rows(),
            found: partition.len(),
        });
    }
    let (selection, holdout) = match config.holdout_fraction {
        Some(f) => {
            let (s, h) = holdout_split(target.n_rows(), f, config.seed)?;
            (target.subset(&s), Some(target.subset(&h)))
        }
        None => (target.clone(), None),
    };

    let mut trials = Vec::with_capacity(config.trials);
    let mut best: Option<(usize, f64, L::Model)> = None;
    for j in 0..config.trials {
        let mut rng = SeedStream::derived(config.seed, "ensemble-trial", j as u64);
        let weights = sample_dirichlet(partition.k(), &mut rng)?;
        let counts = allocate_counts(&weights, config.n_training);
        let rows = stratified_subsample(partition, &counts, config.replacement, &mut rng)?;
        let train = source.subset(&rows);
        let fitted = learner
            .fit(train.features(), train.response())
            .and_then(|model| {
                learner
                    .evaluate(&model, selection.features(), selection.response())
                    .map(|loss| (model, loss))
            });
        let outcome = match fitted {
            Ok((model, loss)) => {
                if best.as_ref().is_none_or(|(_, b, _)| loss.value < *b) {
                    best = Some((j, loss.value, model));
                }
                Ok(loss)
            }
            Err(e) => Err(e),
        };
        trials.push(Trial {
            index: j,
            weights,
            counts,
            outcome,
        });
    }

    let Some((best_index, _, best_model)) = best else {
        // every trial failed; surface the first failure
        return Err(trials[0].outcome.clone().unwrap_err());
    };
    let holdout_loss = match &holdout {
        Some(h) => Some(learner.evaluate(&best_model, h.features(), h.response())?),
        None => None,
    };
    Ok(EnsembleResult {
        trials,
        best_index,
        best_model,
        holdout_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::LearnerSpec;
    use crate::linalg::Matrix;
    use crate::partition::PartitionMethod;

    #[test]
    fn dirichlet_k1_is_degenerate() {
        let mut rng = SeedStream::new(0);
        assert_eq!(sample_dirichlet(1, &mut rng).unwrap().as_slice(), &[1.0]);
        assert!(sample_dirichlet(0, &mut rng).is_err());
    }

    #[test]
    fn dirichlet_k3_is_on_simplex() {
        let mut rng = SeedStream::new(11);
        for _ in 0..1000 {
            let w = sample_dirichlet(3, &mut rng).unwrap();
            assert_eq!(w.k(), 3);
            assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(w.as_slice().iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn allocation_examples() {
        let w = WeightVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert_eq!(allocate_counts(&w, 10), vec![5, 3, 2]);
        let w = WeightVector::new(vec![1.0 / 3.0; 3]).unwrap();
        assert_eq!(allocate_counts(&w, 10), vec![4, 3, 3]);
        let w = WeightVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(allocate_counts(&w, 7), vec![7, 0, 0]);
        assert_eq!(allocate_counts(&w, 0), vec![0, 0, 0]);
    }

    fn three_subsets() -> Partition {
        // subset 0 = {4, 7, 9}
        let labels = vec![1, 1, 2, 2, 0, 1, 2, 0, 1, 0];
        Partition::new(labels, 3, PartitionMethod::Random).unwrap()
    }

    #[test]
    fn subsample_without_replacement_when_possible() {
        let p = three_subsets();
        let mut rng = SeedStream::new(2);
        let rows = stratified_subsample(&p, &[2, 0, 0], Replacement::WhenShort, &mut rng).unwrap();
        assert_eq!(rows.len(), 2);
        assert_ne!(rows[0], rows[1]);
        assert!(rows.iter().all(|r| [4, 7, 9].contains(r)));
    }

    #[test]
    fn subsample_falls_back_to_replacement() {
        let p = three_subsets();
        let mut rng = SeedStream::new(2);
        let rows = stratified_subsample(&p, &[5, 0, 0], Replacement::WhenShort, &mut rng).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| [4, 7, 9].contains(r)));
        assert!(stratified_subsample(&p, &[0, 0, 0], Replacement::WhenShort, &mut rng)
            .unwrap()
            .is_empty());
        assert!(stratified_subsample(&p, &[1, 1], Replacement::WhenShort, &mut rng).is_err());
    }

    fn toy(n: usize, slope: f64) -> Dataset {
        let x = Matrix::from_vec(n, 1, (0..n).map(|i| i as f64 / n as f64).collect()).unwrap();
        let y = (0..n).map(|i| slope * i as f64 / n as f64 + (i % 3) as f64 * 0.01).collect();
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn single_trial_is_best() {
        let source = toy(30, 1.0);
        let target = toy(10, 1.0);
        let p = Partition::new((0..30).map(|i| i % 2).collect(), 2, PartitionMethod::Random).unwrap();
        let result = run_ensemble(
            &target,
            &source,
            &p,
            &LearnerSpec::least_squares(),
            &EnsembleConfig::new(1, 12, 4),
        )
        .unwrap();
        assert_eq!(result.best_index, 0);
        assert_eq!(result.best_loss(), result.trials[0].loss().unwrap());
    }

    #[test]
    fn best_trial_minimizes_loss_and_reruns_match() {
        let source = toy(60, 2.0);
        let target = toy(15, 1.0);
        let p = Partition::new((0..60).map(|i| i % 3).collect(), 3, PartitionMethod::Random).unwrap();
        let config = EnsembleConfig::new(40, 20, 9);
        let a = run_ensemble(&target, &source, &p, &LearnerSpec::least_squares(), &config).unwrap();
        let b = run_ensemble(&target, &source, &p, &LearnerSpec::least_squares(), &config).unwrap();
        let best = a.best_loss().value;
        for (t, u) in a.trials.iter().zip(&b.trials) {
            assert!(best <= t.loss().unwrap().value);
            assert_eq!(t.loss().unwrap().value.to_bits(), u.loss().unwrap().value.to_bits());
            assert_eq!(t.counts.iter().sum::<usize>(), 20);
        }
        assert!(EnsembleConfig::new(0, 20, 1).validate(3).is_err());
        assert!(EnsembleConfig::new(5, 2, 1).validate(3).is_err());
    }

    #[test]
    fn holdout_scores_best_model() {
        let source = toy(40, 1.0);
        let target = toy(20, 1.0);
        let p = Partition::new((0..40).map(|i| i % 2).collect(), 2, PartitionMethod::Random).unwrap();
        let mut config = EnsembleConfig::new(5, 10, 1);
        config.holdout_fraction = Some(0.25);
        let r = run_ensemble(&target, &source, &p, &LearnerSpec::least_squares(), &config).unwrap();
        assert!(r.holdout_loss.is_some());
    }

    #[test]
    fn failed_trials_are_recorded() {
        let source = toy(20, 1.0);
        let target = toy(5, 1.0);
        let p = Partition::new((0..20).map(|i| i % 2).collect(), 2, PartitionMethod::Random).unwrap();
        // non-binary labels make every logistic fit fail
        let err = run_ensemble(&target, &source, &p, &LearnerSpec::logistic(), &EnsembleConfig::new(3, 4, 0))
            .unwrap_err();
        assert!(matches!(err, Error::NonBinaryLabel { .. }));
    }
}
