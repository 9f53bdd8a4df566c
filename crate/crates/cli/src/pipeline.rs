//! simulate → split → partition → select → report.
//!
//! Seeds. Repetition `r` gets `s_r = derive_seed(master, "repetition", r)`.
//! Within it, simulated data uses `derive_seed(s_r, "simulate", 0)` and the
//! run with K subsets uses `derive_seed(s_r, "partition", K)`,
//! `derive_seed(s_r, "ensemble", K)`, and `derive_seed(s_r, "bandit", K)` for
//! Thompson sampling or `derive_seed(s_r, "random", K)` for random selection.
//! A compared pair shares its data and partition; the two bandit runs draw
//! independently. All seeds are listed in the manifest.
//!
//! Layout of a run directory:
//!
//! ```text
//! config.toml                 resolved config echo
//! manifest.json               seeds, file hashes, status
//! error.json                  only when the pipeline failed
//! compare.csv, compare_runs.csv, compare.json      compare only
//! rep-NNN/data.csv            simulate only
//! rep-NNN/split.csv           row,role
//! rep-NNN/target.csv, source.csv                   split only
//! rep-NNN/k-K/partition.csv   source_row,data_row,subset
//! rep-NNN/k-K/partition.json
//! rep-NNN/k-K/ensemble_trials.csv    trial,w_1..w_K,n_1..n_K,loss,error
//! rep-NNN/k-K/ensemble_best.json
//! rep-NNN/k-K/trajectory_<policy>.csv  h,arm,reward,metric,count_1..count_K,D
//! rep-NNN/k-K/posterior_<policy>.json
//! rep-NNN/k-K/summary.json
//! ```
//!
//! Row numbers, subset labels and arms are 1-based in every file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use subsel_core::bandit::{run_bandit, Policy, StopReason, Trajectory};
use subsel_core::dataset::{split_target_source, Dataset, Split};
use subsel_core::diagnostics::occurrence_table;
use subsel_core::ensemble::{run_ensemble, EnsembleResult};
use subsel_core::learner::{FittedModel, Metric};
use subsel_core::linalg::Matrix;
use subsel_core::partition::{
    fit_pca, kmeans_with, partition_by_category, partition_by_metadata, partition_random, KMeansOptions, Partition,
};
use subsel_core::rng::derive_seed;
use subsel_core::simgen::simulate;

use crate::artifacts::{Artifacts, Manifest};
use crate::config::{ClusterInput, ConfigError, DataConfig, ExperimentConfig, PartitionKind};
use crate::csv_io::{dataset_to_csv, load_csv, table_to_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Split,
    Partition,
    Ensemble,
    Bandit,
    Compare,
    /// Whatever `method` asks for.
    Run,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Split => "split",
            Command::Partition => "partition",
            Command::Ensemble => "ensemble",
            Command::Bandit => "bandit",
            Command::Compare => "compare",
            Command::Run => "run",
        }
    }

    fn runs_ensemble(self, config: &ExperimentConfig) -> bool {
        match self {
            Command::Ensemble => true,
            Command::Run => config.method.ensemble(),
            _ => false,
        }
    }

    fn bandit_policies(self, config: &ExperimentConfig) -> Vec<Policy> {
        let configured = || config.bandit.as_ref().map_or(Policy::Thompson, |b| b.policy.policy());
        match self {
            Command::Bandit => vec![configured()],
            Command::Run if config.method.bandit() => vec![configured()],
            Command::Compare => vec![Policy::Thompson, Policy::Random],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("pipeline failed: {message} (partial output in {dir})")]
    Pipeline { message: String, dir: PathBuf },
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 2 for config errors, 3 for everything that happens after validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Pipeline { .. } | RunError::Io(_) => 3,
        }
    }
}

/// Paired Thompson-vs-random outcome of one repetition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedRun {
    pub repetition: usize,
    pub thompson_final: f64,
    pub random_final: f64,
    pub thompson_d: f64,
    pub random_d: f64,
    /// 1-based subset holding the most training rows (lowest label on ties).
    pub thompson_plurality: usize,
    pub random_plurality: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub k: usize,
    pub metric: String,
    pub repetitions: usize,
    /// Pairs where Thompson's final metric is strictly lower.
    pub wins: usize,
    pub win_rate: f64,
    pub thompson_final_mean: f64,
    pub random_final_mean: f64,
    pub runs: Vec<PairedRun>,
    /// Mean metric per iteration `h = 0..=H`; shorter trajectories (early
    /// stopping) carry their last value forward.
    #[serde(skip)]
    pub curve: Vec<(f64, f64)>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub comparisons: Vec<Comparison>,
}

/// Validates, then runs `command` into `out`. Nothing is written when
/// validation fails. Pipeline failures leave the partial artifacts, an
/// `error.json` and a manifest with status `"error"`.
pub fn execute(command: Command, config: &ExperimentConfig, out: &Path) -> Result<RunOutcome, RunError> {
    let needs_ensemble = command.runs_ensemble(config);
    let needs_bandit = !command.bandit_policies(config).is_empty();
    config.validate_for(needs_ensemble, needs_bandit)?;
    if command == Command::Simulate && !matches!(config.data, DataConfig::Simulate(_)) {
        return Err(ConfigError::Invalid("simulate needs a [data] section with kind = \"simulate\"".into()).into());
    }

    let mut artifacts = Artifacts::new(out);
    artifacts.write("config.toml", config.to_toml().as_bytes())?;
    let mut comparisons = Vec::new();
    match run_stages(command, config, &mut artifacts, &mut comparisons) {
        Ok(()) => {
            let manifest = artifacts.finish(command.name(), config.seed, true)?;
            Ok(RunOutcome {
                dir: out.to_path_buf(),
                manifest,
                comparisons,
            })
        }
        Err(Failure::Io(e)) => Err(e.into()),
        Err(Failure::Pipeline(message)) => {
            artifacts.write_json("error.json", &json!({ "command": command.name(), "error": message }))?;
            artifacts.finish(command.name(), config.seed, false)?;
            Err(RunError::Pipeline {
                message,
                dir: out.to_path_buf(),
            })
        }
    }
}

enum Failure {
    Pipeline(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn fail(context: &str) -> impl FnOnce(subsel_core::Error) -> Failure + '_ {
    move |e| Failure::Pipeline(format!("{context}: {e}"))
}

/// Per-K accumulator for policy comparisons.
#[derive(Default)]
struct CompareAcc {
    metric: Option<Metric>,
    runs: Vec<PairedRun>,
    curves: Vec<(Vec<f64>, Vec<f64>)>,
}

fn run_stages(
    command: Command,
    config: &ExperimentConfig,
    artifacts: &mut Artifacts,
    comparisons: &mut Vec<Comparison>,
) -> Result<(), Failure> {
    let loaded = match &config.data {
        DataConfig::Csv(csv) => {
            let data = load_csv(&csv.path, &csv.response, &csv.meta).map_err(|e| Failure::Pipeline(e.to_string()))?;
            Some(if csv.meta_as_features {
                data.with_meta_as_features(&csv.meta).map_err(fail("meta_as_features"))?
            } else {
                data
            })
        }
        DataConfig::Simulate(_) => None,
    };
    let split_spec = config.split.to_spec();
    let learner = config.learner.to_spec();
    let policies = command.bandit_policies(config);
    let mut acc: BTreeMap<usize, CompareAcc> = BTreeMap::new();

    for rep in 0..config.repetitions {
        let tag = format!("rep-{rep:03}");
        let rep_seed = artifacts.seed(format!("{tag}/repetition"), derive_seed(config.seed, "repetition", rep as u64));
        let data = match (&config.data, &loaded) {
            (DataConfig::Simulate(sim), _) => {
                let seed = artifacts.seed(format!("{tag}/simulate"), derive_seed(rep_seed, "simulate", 0));
                simulate(&sim.to_sim_config(seed)).map_err(fail("simulate"))?.data
            }
            (DataConfig::Csv(_), Some(data)) => data.clone(),
            (DataConfig::Csv(_), None) => unreachable!("csv data is loaded up front"),
        };
        if command == Command::Simulate {
            artifacts.write(&format!("{tag}/data.csv"), &dataset_to_csv(&data))?;
            continue;
        }

        let split = split_target_source(&data, &split_spec).map_err(fail("split"))?;
        artifacts.write(&format!("{tag}/split.csv"), &split_csv(&split, data.n_rows()))?;
        if command == Command::Split {
            artifacts.write(&format!("{tag}/target.csv"), &dataset_to_csv(&split.target))?;
            artifacts.write(&format!("{tag}/source.csv"), &dataset_to_csv(&split.source))?;
            continue;
        }

        for k in config.partition.k_list() {
            let key = k.unwrap_or(0) as u64;
            let partition_seed = derive_seed(rep_seed, "partition", key);
            let (partition, details) = build_partition(config, &split.source, k, partition_seed)?;
            let kk = partition.k();
            let dir = format!("{tag}/k-{kk}");
            artifacts.seed(format!("{dir}/partition"), partition_seed);
            artifacts.write(&format!("{dir}/partition.csv"), &partition_csv(&partition, &split))?;
            artifacts.write_json(&format!("{dir}/partition.json"), &details)?;
            if command == Command::Partition {
                continue;
            }

            let mut summary = json!({
                "repetition": rep,
                "k": kk,
                "n_target": split.target.n_rows(),
                "n_source": split.source.n_rows(),
                "subset_sizes": partition.sizes(),
                "metric": learner.family.metric().name(),
            });

            if command.runs_ensemble(config) {
                let section = config.ensemble.as_ref().expect("validated");
                let seed = artifacts.seed(format!("{dir}/ensemble"), derive_seed(rep_seed, "ensemble", kk as u64));
                let result = run_ensemble(&split.target, &split.source, &partition, &learner, &section.to_config(seed))
                    .map_err(fail("ensemble"))?;
                artifacts.write(&format!("{dir}/ensemble_trials.csv"), &trials_csv(&result, kk))?;
                let best = best_json(&result, &split.source);
                artifacts.write_json(&format!("{dir}/ensemble_best.json"), &best)?;
                summary["ensemble"] = json!({
                    "best_trial": result.best_index + 1,
                    "best_weights": result.best_weights().as_slice(),
                    "best_loss": result.best_loss().value,
                    "holdout_loss": result.holdout_loss.map(|l| l.value),
                    "failed_trials": result.trials.iter().filter(|t| t.loss().is_none()).count(),
                });
            }

            if !policies.is_empty() {
                let section = config.bandit.as_ref().expect("validated");
                let mut finals = BTreeMap::new();
                for &policy in &policies {
                    let name = policy.name();
                    let stream = policy_stream(policy);
                    let seed = artifacts.seed(format!("{dir}/{stream}"), derive_seed(rep_seed, stream, kk as u64));
                    let outcome = run_bandit(
                        &split.target,
                        &split.source,
                        &partition,
                        &learner,
                        &section.to_config(seed, policy),
                    );
                    let (trajectory, error) = match outcome {
                        Ok(t) => (t, None),
                        Err(f) => (f.partial, Some(f.error)),
                    };
                    artifacts.write(&format!("{dir}/trajectory_{name}.csv"), &trajectory_csv(&trajectory, kk))?;
                    artifacts.write_json(&format!("{dir}/posterior_{name}.json"), &posterior_json(&trajectory))?;
                    if let Some(e) = error {
                        return Err(Failure::Pipeline(format!("bandit ({name}, {dir}): {e}")));
                    }
                    summary["bandit"][name] = json!({
                        "initial_metric": trajectory.initial_metric.value,
                        "final_metric": trajectory.final_metric().value,
                        "cumulative_reward": trajectory.cumulative_reward(),
                        "final_counts": trajectory.final_counts(),
                        "final_d": trajectory.final_summary(),
                        "iterations": trajectory.records.len(),
                    });
                    finals.insert(name, trajectory);
                }
                if command == Command::Compare {
                    let t = &finals["thompson"];
                    let r = &finals["random"];
                    let entry = acc.entry(kk).or_default();
                    entry.metric = Some(t.initial_metric.metric);
                    entry.runs.push(PairedRun {
                        repetition: rep,
                        thompson_final: t.final_metric().value,
                        random_final: r.final_metric().value,
                        thompson_d: t.final_summary(),
                        random_d: r.final_summary(),
                        thompson_plurality: plurality(&t.final_counts()) + 1,
                        random_plurality: plurality(&r.final_counts()) + 1,
                    });
                    entry.curves.push((metric_curve(t), metric_curve(r)));
                }
            }
            artifacts.write_json(&format!("{dir}/summary.json"), &summary)?;
        }
    }

    if command == Command::Compare {
        for (k, a) in acc {
            comparisons.push(summarize(k, a));
        }
        write_comparisons(artifacts, comparisons)?;
    }
    Ok(())
}

/// Subset with the most rows, lowest index on ties.
/// Each policy draws from its own seed stream, so compared runs are independent.
fn policy_stream(policy: Policy) -> &'static str {
    match policy {
        Policy::Thompson => "bandit",
        Policy::Random => "random",
    }
}

pub fn plurality(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

fn metric_curve(t: &Trajectory) -> Vec<f64> {
    std::iter::once(t.initial_metric.value)
        .chain(t.records.iter().map(|r| r.metric.value))
        .collect()
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn summarize(k: usize, acc: CompareAcc) -> Comparison {
    let n = acc.runs.len();
    let wins = acc.runs.iter().filter(|r| r.thompson_final < r.random_final).count();
    let len = acc
        .curves
        .iter()
        .map(|(t, r)| t.len().max(r.len()))
        .max()
        .unwrap_or(0);
    let at = |c: &Vec<f64>, h: usize| c[h.min(c.len() - 1)];
    let curve = (0..len)
        .map(|h| {
            (
                mean(acc.curves.iter().map(|(t, _)| at(t, h))),
                mean(acc.curves.iter().map(|(_, r)| at(r, h))),
            )
        })
        .collect();
    Comparison {
        k,
        metric: acc.metric.map_or("", |m| m.name()).to_string(),
        repetitions: n,
        wins,
        win_rate: if n == 0 { f64::NAN } else { wins as f64 / n as f64 },
        thompson_final_mean: mean(acc.runs.iter().map(|r| r.thompson_final)),
        random_final_mean: mean(acc.runs.iter().map(|r| r.random_final)),
        runs: acc.runs,
        curve,
    }
}

fn write_comparisons(artifacts: &mut Artifacts, comparisons: &[Comparison]) -> std::io::Result<()> {
    let curve_rows = comparisons.iter().flat_map(|c| {
        c.curve
            .iter()
            .enumerate()
            .map(move |(h, (t, r))| vec![c.k.to_string(), h.to_string(), t.to_string(), r.to_string()])
    });
    artifacts.write(
        "compare.csv",
        &table_to_csv(&["k", "h", "thompson_mean", "random_mean"], curve_rows),
    )?;
    let run_rows = comparisons.iter().flat_map(|c| {
        c.runs.iter().map(move |r| {
            vec![
                c.k.to_string(),
                (r.repetition + 1).to_string(),
                r.thompson_final.to_string(),
                r.random_final.to_string(),
                u8::from(r.thompson_final < r.random_final).to_string(),
                r.thompson_d.to_string(),
                r.random_d.to_string(),
                r.thompson_plurality.to_string(),
                r.random_plurality.to_string(),
            ]
        })
    });
    artifacts.write(
        "compare_runs.csv",
        &table_to_csv(
            &[
                "k",
                "repetition",
                "thompson_final",
                "random_final",
                "thompson_wins",
                "thompson_d",
                "random_d",
                "thompson_plurality",
                "random_plurality",
            ],
            run_rows,
        ),
    )?;
    artifacts.write_json("compare.json", &comparisons)
}

fn build_partition(
    config: &ExperimentConfig,
    source: &Dataset,
    k: Option<usize>,
    seed: u64,
) -> Result<(Partition, serde_json::Value), Failure> {
    let p = &config.partition;
    let column = || p.column.as_deref().expect("validated");
    match p.method {
        PartitionKind::Metadata => {
            let bounds = p.boundaries.as_deref().expect("validated");
            let partition = partition_by_metadata(source, column(), bounds).map_err(fail("partition"))?;
            let details = json!({ "method": "metadata", "column": column(), "boundaries": bounds, "sizes": partition.sizes() });
            Ok((partition, details))
        }
        PartitionKind::Category => {
            let (partition, categories) = partition_by_category(source, column()).map_err(fail("partition"))?;
            if let Some(k) = k.filter(|&k| k != partition.k()) {
                return Err(Failure::Pipeline(format!(
                    "partition: column `{}` has {} distinct source values but k = {k}",
                    column(),
                    partition.k()
                )));
            }
            let labels: Vec<String> = categories.iter().map(ToString::to_string).collect();
            let details = json!({ "method": "category", "column": column(), "categories": labels, "sizes": partition.sizes() });
            Ok((partition, details))
        }
        PartitionKind::Random => {
            let k = k.expect("validated");
            let partition = partition_random(source.n_rows(), k, seed).map_err(fail("partition"))?;
            let details = json!({ "method": "random", "seed": seed, "sizes": partition.sizes() });
            Ok((partition, details))
        }
        PartitionKind::Kmeans => {
            let k = k.expect("validated");
            let mut x = Matrix::zeros(source.n_rows(), 0);
            let mut columns: Vec<String> = Vec::new();
            for input in &p.cluster_on {
                let (block, names) = match input {
                    ClusterInput::Features => (source.features().clone(), source.feature_names().to_vec()),
                    ClusterInput::Response => (
                        Matrix::from_vec(source.n_rows(), 1, source.response().to_vec()).map_err(fail("partition"))?,
                        vec![source.response_name().to_string()],
                    ),
                    ClusterInput::Meta => meta_block(source)?,
                };
                x = x.hstack(&block).map_err(fail("partition"))?;
                columns.extend(names);
            }
            let mut options = KMeansOptions {
                max_iters: p.max_iters,
                standardize: p.standardize,
            };
            let mut details = json!({ "method": "kmeans", "seed": seed, "columns": columns, "standardize": p.standardize });
            if let Some(c) = p.pca_components {
                let input = if p.standardize {
                    subsel_core::partition::standardize(&x)
                } else {
                    x
                };
                let pca = fit_pca(&input, c).map_err(fail("pca"))?;
                x = pca.transform(&input).map_err(fail("pca"))?;
                // scores keep their variances; rescaling would inflate minor components
                options.standardize = false;
                details["pca_components"] = json!(c);
                details["explained_variance_ratio"] = json!(pca.explained_variance_ratio());
            }
            let fit = kmeans_with(&x, k, seed, &options).map_err(fail("kmeans"))?;
            details["inertia_trace"] = json!(fit.inertia_trace);
            details["converged"] = json!(fit.converged);
            details["sizes"] = json!(fit.partition.sizes());
            Ok((fit.partition, details))
        }
    }
}

fn meta_block(source: &Dataset) -> Result<(Matrix, Vec<String>), Failure> {
    let n = source.n_rows();
    let mut m = Matrix::zeros(n, source.meta().len());
    let mut names = Vec::new();
    for (j, column) in source.meta().iter().enumerate() {
        let values = source
            .numeric_meta(&column.name)
            .map_err(|e| Failure::Pipeline(format!("partition: cannot cluster on `{}`: {e}", column.name)))?;
        for (i, v) in values.into_iter().enumerate() {
            m.set(i, j, v);
        }
        names.push(column.name.clone());
    }
    Ok((m, names))
}

fn split_csv(split: &Split, n: usize) -> Vec<u8> {
    let mut role = vec![""; n];
    for &i in &split.target_rows {
        role[i] = "target";
    }
    for &i in &split.source_rows {
        role[i] = "source";
    }
    table_to_csv(
        &["row", "role"],
        role.iter().enumerate().map(|(i, r)| vec![(i + 1).to_string(), r.to_string()]),
    )
}

fn partition_csv(partition: &Partition, split: &Split) -> Vec<u8> {
    table_to_csv(
        &["source_row", "data_row", "subset"],
        partition.labels().iter().enumerate().map(|(i, &label)| {
            vec![
                (i + 1).to_string(),
                (split.source_rows[i] + 1).to_string(),
                (label + 1).to_string(),
            ]
        }),
    )
}

fn numbered(prefix: &str, k: usize) -> impl Iterator<Item = String> + '_ {
    (1..=k).map(move |i| format!("{prefix}{i}"))
}

fn trials_csv(result: &EnsembleResult<FittedModel>, k: usize) -> Vec<u8> {
    let header: Vec<String> = std::iter::once("trial".to_string())
        .chain(numbered("w_", k))
        .chain(numbered("n_", k))
        .chain(["loss".to_string(), "error".to_string()])
        .collect();
    let rows = result.trials.iter().map(|t| {
        let mut row = vec![(t.index + 1).to_string()];
        row.extend(t.weights.as_slice().iter().map(f64::to_string));
        row.extend(t.counts.iter().map(usize::to_string));
        match &t.outcome {
            Ok(loss) => row.extend([loss.value.to_string(), String::new()]),
            Err(e) => row.extend([String::new(), e.to_string()]),
        }
        row
    });
    table_to_csv(&header, rows)
}

fn model_json(model: &FittedModel, source: &Dataset) -> serde_json::Value {
    let mut terms: Vec<String> = Vec::new();
    if model.intercept {
        terms.push("(intercept)".to_string());
    }
    terms.extend(source.feature_names().iter().cloned());
    json!({
        "family": model.family.name(),
        "terms": terms,
        "coefficients": model.coefficients,
        "ridge_used": model.ridge_used,
        "converged": model.converged,
    })
}

fn best_json(result: &EnsembleResult<FittedModel>, source: &Dataset) -> serde_json::Value {
    let best = result.best_trial();
    json!({
        "trial": best.index + 1,
        "weights": best.weights.as_slice(),
        "counts": best.counts,
        "loss": result.best_loss().value,
        "metric": result.best_loss().metric.name(),
        "holdout_loss": result.holdout_loss.map(|l| l.value),
        "model": model_json(&result.best_model, source),
    })
}

fn trajectory_csv(t: &Trajectory, k: usize) -> Vec<u8> {
    let header: Vec<String> = ["h", "arm", "reward", "metric"]
        .into_iter()
        .map(String::from)
        .chain(numbered("count_", k))
        .chain(std::iter::once("D".to_string()))
        .collect();
    // h = 0 is the starting model, before any batch
    let start = std::iter::once({
        let mut row = vec!["0".to_string(), String::new(), String::new(), t.initial_metric.value.to_string()];
        row.extend((0..k).map(|_| "0".to_string()));
        row.push(String::new());
        row
    });
    let records = t.records.iter().map(|r| {
        let mut row = vec![
            r.iteration.to_string(),
            (r.arm + 1).to_string(),
            u8::from(r.reward).to_string(),
            r.metric.value.to_string(),
        ];
        row.extend(r.counts.iter().map(usize::to_string));
        row.push(r.summary.to_string());
        row
    });
    table_to_csv(&header, start.chain(records))
}

fn posterior_json(t: &Trajectory) -> serde_json::Value {
    let k = t.posterior.k();
    json!({
        "policy": t.policy.name(),
        "alpha0": t.posterior.alpha0,
        "beta0": t.posterior.beta0,
        "alpha": t.posterior.alpha,
        "beta": t.posterior.beta,
        "posterior_mean": (0..k).map(|a| t.posterior.mean(a)).collect::<Vec<_>>(),
        "occurrences": occurrence_table(t),
        "cumulative_reward": t.cumulative_reward(),
        "initial_metric": t.initial_metric.value,
        "final_metric": if t.records.is_empty() { None } else { Some(t.final_metric().value) },
        "stop": t.stop.map(|s| match s {
            StopReason::Converged => "converged",
            StopReason::MaxIterations => "max-iterations",
        }),
    })
}

/// The default output directory: `$SUBSEL_OUTPUT_ROOT/<name>-<command>`, or
/// `runs/<name>-<command>` when the variable is unset.
pub fn default_output_dir(config: &ExperimentConfig, command: Command) -> PathBuf {
    let root = std::env::var_os(OUTPUT_ROOT_ENV)
        .filter(|v| !v.is_empty())
        .map_or_else(|| PathBuf::from("runs"), PathBuf::from);
    let name = config.name.as_deref().unwrap_or("experiment");
    root.join(format!("{name}-{}", command.name()))
}

pub const OUTPUT_ROOT_ENV: &str = "SUBSEL_OUTPUT_ROOT";
