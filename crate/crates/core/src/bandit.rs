//! Sequential source-subset selection with Beta-Bernoulli Thompson sampling.
//!
//! Each subset is an arm. Pulling an arm adds a batch of its rows (drawn with
//! replacement) to the training set, the learner is refit from scratch on the
//! whole training set, and the arm is rewarded when the target metric strictly
//! improves. A uniform-random policy over the same loop serves as the baseline.

use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::diagnostics::{composition_weights, summary_stat};
use crate::ensemble::argmax_lowest;
use crate::learner::{Learner, LossValue};
use crate::partition::Partition;
use crate::rng::SeedStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Thompson,
    Random,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Thompson => "thompson",
            Policy::Random => "random",
        }
    }
}

/// Per-arm Beta posteriors over the probability that a pull improves the target.
///
/// `alpha[k]` is always exactly `alpha0 + successes[k]` (likewise `beta`), so
/// the parameters never drift from the counts through repeated rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmPosterior {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub alpha0: f64,
    pub beta0: f64,
    pub successes: Vec<u64>,
    pub failures: Vec<u64>,
}

impl ArmPosterior {
    pub fn new(k: usize, alpha0: f64, beta0: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: "must be at least 1",
            });
        }
        if !(alpha0 > 0.0 && beta0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "prior",
                reason: "alpha0 and beta0 must be positive",
            });
        }
        Self::from_counts(alpha0, beta0, vec![0; k], vec![0; k])
    }

    /// Posterior after the given per-arm success and failure counts.
    pub fn from_counts(alpha0: f64, beta0: f64, successes: Vec<u64>, failures: Vec<u64>) -> Result<Self> {
        if successes.len() != failures.len() {
            return Err(Error::DimensionMismatch {
                context: "failure counts",
                expected: successes.len(),
                found: failures.len(),
            });
        }
        Ok(ArmPosterior {
            alpha: successes.iter().map(|&s| alpha0 + s as f64).collect(),
            beta: failures.iter().map(|&f| beta0 + f as f64).collect(),
            alpha0,
            beta0,
            successes,
            failures,
        })
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    /// Number of completed pulls of `arm`.
    pub fn pulls(&self, arm: usize) -> f64 {
        (self.successes[arm] + self.failures[arm]) as f64
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.alpha[arm] / (self.alpha[arm] + self.beta[arm])
    }

    /// Conjugate update: a success bumps `alpha`, a failure bumps `beta`.
    pub fn record(&mut self, arm: usize, reward: bool) {
        if reward {
            self.successes[arm] += 1;
            self.alpha[arm] = self.alpha0 + self.successes[arm] as f64;
        } else {
            self.failures[arm] += 1;
            self.beta[arm] = self.beta0 + self.failures[arm] as f64;
        }
    }
}

/// Returns the posterior after one observed reward on `arm`.
pub fn update_posterior(posterior: &ArmPosterior, arm: usize, reward: bool) -> ArmPosterior {
    let mut next = posterior.clone();
    next.record(arm, reward);
    next
}

/// One Beta(alpha, beta) draw as `x / (x + y)` with `x ~ Gamma(alpha)`,
/// `y ~ Gamma(beta)`. The result lies strictly inside (0, 1).
pub fn sample_beta(alpha: f64, beta: f64, rng: &mut SeedStream) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta distribution",
            reason: "alpha and beta must be positive and finite",
        });
    }
    loop {
        let x = rng.gamma(alpha);
        let y = rng.gamma(beta);
        let draw = x / (x + y);
        // both gammas can underflow for tiny shapes; redraw rather than return 0 or 1
        if draw > 0.0 && draw < 1.0 {
            return Ok(draw);
        }
    }
}

/// Thompson: one posterior draw per arm, highest draw wins (lowest index on
/// ties). Random: uniform over arms.
pub fn choose_arm(posterior: &ArmPosterior, policy: Policy, rng: &mut SeedStream) -> usize {
    match policy {
        Policy::Thompson => {
            let draws: Vec<f64> = posterior
                .alpha
                .iter()
                .zip(&posterior.beta)
                .map(|(&a, &b)| sample_beta(a, b, rng).expect("posterior parameters stay positive"))
                .collect();
            argmax_lowest(&draws)
        }
        Policy::Random => rng.index(posterior.k()),
    }
}

/// 1 when the current loss is strictly lower than the previous one; ties and
/// regressions give 0.
pub fn compute_reward(previous: LossValue, current: LossValue) -> Result<bool> {
    if previous.metric != current.metric {
        return Err(Error::MetricMismatch);
    }
    Ok(current.value < previous.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditConfig {
    /// Iteration cap `H`.
    pub iterations: usize,
    /// Rows added per pull `b`.
    pub batch_size: usize,
    /// Stop once the metric moves by at most this much in one iteration.
    /// Zero disables the check, so exactly `iterations` iterations run.
    pub epsilon: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub seed: u64,
    pub policy: Policy,
}

impl BanditConfig {
    pub fn new(iterations: usize, batch_size: usize, seed: u64, policy: Policy) -> Self {
        BanditConfig {
            iterations,
            batch_size,
            epsilon: 0.0,
            alpha0: 1.0,
            beta0: 1.0,
            seed,
            policy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "iterations",
                reason: "must be at least 1",
            });
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter {
                name: "batch_size",
                reason: "must be at least 1",
            });
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "must be nonnegative",
            });
        }
        if !(self.alpha0 > 0.0 && self.beta0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "prior",
                reason: "alpha0 and beta0 must be positive",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration number `h`.
    pub iteration: usize,
    pub arm: usize,
    pub reward: bool,
    pub metric: LossValue,
    /// Rows from each subset in the training set after this iteration.
    pub counts: Vec<usize>,
    /// Nonuniformity of `counts` (see [`summary_stat`]).
    pub summary: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub policy: Policy,
    /// Source rows used for the starting model (not part of the training set).
    pub initial_rows: Vec<usize>,
    /// Metric `a_0` of the starting model.
    pub initial_metric: LossValue,
    pub records: Vec<IterationRecord>,
    /// Accumulated training rows, in the order they were added.
    pub training_rows: Vec<usize>,
    pub posterior: ArmPosterior,
    /// `None` when the run was aborted.
    pub stop: Option<StopReason>,
}

impl Trajectory {
    pub fn k(&self) -> usize {
        self.posterior.k()
    }

    pub fn arms(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.arm).collect()
    }

    pub fn cumulative_reward(&self) -> usize {
        self.records.iter().filter(|r| r.reward).count()
    }

    /// Metric after the last completed iteration (or the starting metric).
    pub fn final_metric(&self) -> LossValue {
        self.records.last().map_or(self.initial_metric, |r| r.metric)
    }

    pub fn final_counts(&self) -> Vec<usize> {
        self.records
            .last()
            .map_or_else(|| vec![0; self.k()], |r| r.counts.clone())
    }

    pub fn final_summary(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.summary)
    }
}

/// A learner failure part-way through a run, with everything recorded before it.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditFailure {
    pub partial: Trajectory,
    pub error: Error,
}

impl core::fmt::Display for BanditFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "bandit aborted after {} iterations: {}",
            self.partial.records.len(),
            self.error
        )
    }
}

impl core::error::Error for BanditFailure {}

impl From<Error> for BanditFailure {
    fn from(error: Error) -> Self {
        BanditFailure {
            partial: Trajectory {
                policy: Policy::Random,
                initial_rows: Vec::new(),
                initial_metric: LossValue::mse(f64::NAN),
                records: Vec::new(),
                training_rows: Vec::new(),
                posterior: ArmPosterior {
                    alpha: Vec::new(),
                    beta: Vec::new(),
                    alpha0: 1.0,
                    beta0: 1.0,
                    successes: Vec::new(),
                    failures: Vec::new(),
                },
                stop: None,
            },
            error,
        }
    }
}

/// Runs the selection loop.
///
/// The starting model is fit on `batch_size` rows drawn uniformly (with
/// replacement) from the whole source; those rows do not enter the training
/// set. Randomness comes from three streams derived from `config.seed`:
/// `"bandit-init"`, `"bandit-arm"` and `"bandit-batch"`.
pub fn run_bandit<L: Learner>(
    target: &Dataset,
    source: &Dataset,
    partition: &Partition,
    learner: &L,
    config: &BanditConfig,
) -> core::result::Result<Trajectory, BanditFailure> {
    config.validate()?;
    if target.n_rows() == 0 {
        return Err(Error::EmptyTarget.into());
    }
    if partition.len() != source.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "partition length",
            expected: source.n_rows(),
            found: partition.len(),
        }
        .into());
    }
    let k = partition.k();
    let mut init_rng = SeedStream::derived(config.seed, "bandit-init", 0);
    let mut arm_rng = SeedStream::derived(config.seed, "bandit-arm", 0);
    let mut batch_rng = SeedStream::derived(config.seed, "bandit-batch", 0);

    let initial_rows: Vec<usize> = (0..config.batch_size)
        .map(|_| init_rng.index(source.n_rows()))
        .collect();
    let initial = source.subset(&initial_rows);
    let initial_metric = learner
        .fit(initial.features(), initial.response())
        .and_then(|m| learner.evaluate(&m, target.features(), target.response()))?;

    let mut trajectory = Trajectory {
        policy: config.policy,
        initial_rows,
        initial_metric,
        records: Vec::with_capacity(config.iterations),
        training_rows: Vec::with_capacity(config.iterations * config.batch_size),
        posterior: ArmPosterior::new(k, config.alpha0, config.beta0)?,
        stop: None,
    };
    let mut counts = vec![0usize; k];
    let mut previous = initial_metric;

    for h in 1..=config.iterations {
        let arm = choose_arm(&trajectory.posterior, config.policy, &mut arm_rng);
        let members = partition.members(arm);
        trajectory
            .training_rows
            .extend((0..config.batch_size).map(|_| members[batch_rng.index(members.len())]));
        counts[arm] += config.batch_size;

        let train = source.subset(&trajectory.training_rows);
        let step = learner
            .fit(train.features(), train.response())
            .and_then(|m| learner.evaluate(&m, target.features(), target.response()))
            .and_then(|metric| compute_reward(previous, metric).map(|r| (metric, r)));
        let (metric, reward) = match step {
            Ok(v) => v,
            Err(error) => {
                // drop the batch whose fit failed so counts and rows stay consistent
                let keep = trajectory.training_rows.len() - config.batch_size;
                trajectory.training_rows.truncate(keep);
                return Err(BanditFailure {
                    partial: trajectory,
                    error,
                });
            }
        };
        trajectory.posterior.record(arm, reward);
        let weights = composition_weights(&counts).expect("counts are positive after a pull");
        trajectory.records.push(IterationRecord {
            iteration: h,
            arm,
            reward,
            metric,
            counts: counts.clone(),
            summary: summary_stat(&weights),
        });

        if config.epsilon > 0.0 && libm::fabs(metric.value - previous.value) <= config.epsilon {
            trajectory.stop = Some(StopReason::Converged);
            return Ok(trajectory);
        }
        previous = metric;
    }
    trajectory.stop = Some(StopReason::MaxIterations);
    Ok(trajectory)
}
