//! Experiment configuration: one TOML file per experiment.
//!
//! ```toml
//! name = "sim-time-varying"
//! seed = 20240101
//! repetitions = 20
//! method = "both"            # ensemble | bandit | both
//!
//! [data]
//! kind = "simulate"          # or "csv" with path, response, meta
//! variant = "time-varying"
//!
//! [split]
//! kind = "range"             # range | equality | rows
//! bounds = [{ column = "z", lower = 9.0 }]
//!
//! [partition]
//! method = "metadata"        # metadata | category | kmeans | random
//! column = "z"
//! boundaries = [3.0, 5.0]
//!
//! [ensemble]
//! trials = 1000
//! n_training = 1000
//!
//! [bandit]
//! iterations = 30
//! batch_size = 10
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use subsel_core::bandit::{BanditConfig, Policy};
use subsel_core::dataset::{MetaValue, RangeBound, SplitSpec};
use subsel_core::ensemble::{EnsembleConfig, Replacement};
use subsel_core::learner::{Family, LearnerSpec};
use subsel_core::simgen::{SimConfig, Variant};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown preset `{0}` (available: {list})", list = crate::presets::NAMES.join(", "))]
    UnknownPreset(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Master seed; every random stream is derived from it.
    #[serde(default)]
    pub seed: u64,
    /// Independent seeded runs (simulated data is regenerated for each).
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub data: DataConfig,
    pub split: SplitConfig,
    pub partition: PartitionConfig,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandit: Option<BanditSection>,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ensemble,
    Bandit,
    #[default]
    Both,
}

impl Method {
    pub fn ensemble(self) -> bool {
        matches!(self, Method::Ensemble | Method::Both)
    }

    pub fn bandit(self) -> bool {
        matches!(self, Method::Bandit | Method::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataConfig {
    Simulate(SimSection),
    Csv(CsvSection),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimVariant {
    TimeVarying,
    TimeInvariant,
}

/// Simulation parameters; anything left out keeps the generator default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub variant: SimVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coef_noise_sd: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<[f64; 2]>,
    #[serde(default)]
    pub integer_z: bool,
}

impl SimSection {
    pub fn to_sim_config(&self, seed: u64) -> SimConfig {
        let d = SimConfig::default();
        SimConfig {
            n: self.n.unwrap_or(d.n),
            beta: self.beta.clone().unwrap_or(d.beta),
            coef_noise_sd: self.coef_noise_sd.clone().unwrap_or(d.coef_noise_sd),
            alpha_range: self.alpha_range.map_or(d.alpha_range, |[a, b]| (a, b)),
            noise_sd: self.noise_sd.unwrap_or(d.noise_sd),
            z_range: self.z_range.map_or(d.z_range, |[a, b]| (a, b)),
            breakpoints: self.breakpoints.unwrap_or(d.breakpoints),
            variant: match self.variant {
                SimVariant::TimeVarying => Variant::TimeVarying,
                SimVariant::TimeInvariant => Variant::TimeInvariant,
            },
            integer_z: self.integer_z,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSection {
    /// Relative paths resolve against the config file's directory.
    pub path: PathBuf,
    pub response: String,
    #[serde(default)]
    pub meta: Vec<String>,
    /// Append the (numeric) metadata columns to the learner's features.
    #[serde(default)]
    pub meta_as_features: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SplitConfig {
    /// Target rows satisfy `lower < value <= upper` for every bound.
    Range { bounds: Vec<BoundConfig> },
    Equality { column: String, value: Literal },
    /// 0-based data-row indices of the target.
    Rows { rows: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Number(f64),
    Text(String),
}

impl SplitConfig {
    pub fn to_spec(&self) -> SplitSpec {
        match self {
            SplitConfig::Range { bounds } => SplitSpec::MetadataRange(
                bounds
                    .iter()
                    .map(|b| RangeBound {
                        column: b.column.clone(),
                        lower: b.lower,
                        upper: b.upper,
                    })
                    .collect(),
            ),
            SplitConfig::Equality { column, value } => SplitSpec::MetadataEquality {
                column: column.clone(),
                value: match value {
                    Literal::Number(x) => MetaValue::Number(*x),
                    // numeric-looking text matches numeric cells, as in ingestion
                    Literal::Text(s) => match s.parse::<f64>() {
                        Ok(x) if x.is_finite() => MetaValue::Number(x),
                        _ => MetaValue::Text(s.clone()),
                    },
                },
            },
            SplitConfig::Rows { rows } => SplitSpec::RowIndices(rows.clone()),
        }
    }

    fn columns(&self) -> Vec<&str> {
        match self {
            SplitConfig::Range { bounds } => bounds.iter().map(|b| b.column.as_str()).collect(),
            SplitConfig::Equality { column, .. } => vec![column.as_str()],
            SplitConfig::Rows { .. } => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionKind {
    /// Right-closed bins of a numeric metadata column.
    Metadata,
    /// One subset per distinct value of a metadata column.
    Category,
    Kmeans,
    Random,
}

/// What the clustering sees, in addition to nothing else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterInput {
    Features,
    Meta,
    Response,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    pub method: PartitionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Sweep: one run per K.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_values: Option<Vec<usize>>,
    #[serde(default = "yes")]
    pub standardize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pca_components: Option<usize>,
    #[serde(default = "default_cluster_on")]
    pub cluster_on: Vec<ClusterInput>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_cluster_on() -> Vec<ClusterInput> {
    vec![ClusterInput::Features]
}

fn default_max_iters() -> usize {
    300
}

impl PartitionConfig {
    /// The K of each run, `None` when the data decides (categorical bins).
    pub fn k_list(&self) -> Vec<Option<usize>> {
        match self.method {
            PartitionKind::Metadata => {
                vec![Some(self.boundaries.as_ref().map_or(0, Vec::len) + 1)]
            }
            PartitionKind::Category => vec![self.k],
            PartitionKind::Kmeans | PartitionKind::Random => match (&self.k_values, self.k) {
                (Some(ks), _) => ks.iter().copied().map(Some).collect(),
                (None, k) => vec![k],
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyConfig {
    LeastSquares,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    #[serde(default = "default_family")]
    pub family: FamilyConfig,
    #[serde(default = "yes")]
    pub intercept: bool,
    #[serde(default = "default_ridge")]
    pub ridge_epsilon: f64,
    #[serde(default = "default_newton_iters")]
    pub max_iters: usize,
    #[serde(default = "default_newton_tol")]
    pub tolerance: f64,
}

fn default_family() -> FamilyConfig {
    FamilyConfig::LeastSquares
}

fn default_ridge() -> f64 {
    1e-10
}

fn default_newton_iters() -> usize {
    100
}

fn default_newton_tol() -> f64 {
    1e-10
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            family: default_family(),
            intercept: true,
            ridge_epsilon: default_ridge(),
            max_iters: default_newton_iters(),
            tolerance: default_newton_tol(),
        }
    }
}

impl LearnerConfig {
    pub fn to_spec(&self) -> LearnerSpec {
        LearnerSpec {
            family: match self.family {
                FamilyConfig::LeastSquares => Family::LeastSquares,
                FamilyConfig::Logistic => Family::Logistic,
            },
            intercept: self.intercept,
            ridge_epsilon: self.ridge_epsilon,
            max_iters: self.max_iters,
            tolerance: self.tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplacementConfig {
    #[default]
    WhenShort,
    Always,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    /// Number of Dirichlet weightings `J`.
    pub trials: usize,
    pub n_training: usize,
    #[serde(default)]
    pub replacement: ReplacementConfig,
    /// Hold out this fraction of the target for an unbiased loss of the winner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdout_fraction: Option<f64>,
}

impl EnsembleSection {
    pub fn to_config(&self, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            replacement: match self.replacement {
                ReplacementConfig::WhenShort => Replacement::WhenShort,
                ReplacementConfig::Always => Replacement::Always,
            },
            holdout_fraction: self.holdout_fraction,
            ..EnsembleConfig::new(self.trials, self.n_training, seed)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyConfig {
    #[default]
    Thompson,
    Random,
}

impl PolicyConfig {
    pub fn policy(self) -> Policy {
        match self {
            PolicyConfig::Thompson => Policy::Thompson,
            PolicyConfig::Random => Policy::Random,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditSection {
    /// Iteration cap `H`.
    pub iterations: usize,
    /// Rows per pull `b`.
    pub batch_size: usize,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "unit")]
    pub alpha0: f64,
    #[serde(default = "unit")]
    pub beta0: f64,
    #[serde(default)]
    pub policy: PolicyConfig,
}

fn unit() -> f64 {
    1.0
}

impl BanditSection {
    pub fn to_config(&self, seed: u64, policy: Policy) -> BanditConfig {
        BanditConfig {
            epsilon: self.epsilon,
            alpha0: self.alpha0,
            beta0: self.beta0,
            ..BanditConfig::new(self.iterations, self.batch_size, seed, policy)
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config file; relative data paths are resolved against its directory.
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&text)?;
        if let DataConfig::Csv(csv) = &mut config.data {
            if csv.path.is_relative() {
                if let Some(dir) = path.parent() {
                    csv.path = dir.join(&csv.path);
                }
            }
        }
        if config.name.is_none() {
            config.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks everything that can be checked without touching the data.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.repetitions == 0 {
            return Err(invalid("repetitions must be at least 1"));
        }
        self.learner
            .to_spec()
            .validate()
            .map_err(|e| invalid(format!("learner: {e}")))?;

        let meta_columns: Vec<String> = match &self.data {
            DataConfig::Simulate(sim) => {
                sim.to_sim_config(0)
                    .validate()
                    .map_err(|e| invalid(format!("data: {e}")))?;
                vec!["z".to_string()]
            }
            DataConfig::Csv(csv) => {
                if csv.response.is_empty() {
                    return Err(invalid("data.response must name a column"));
                }
                if csv.meta.contains(&csv.response) {
                    return Err(invalid("data.response cannot also be a metadata column"));
                }
                for (i, m) in csv.meta.iter().enumerate() {
                    if csv.meta[..i].contains(m) {
                        return Err(invalid(format!("data.meta lists `{m}` twice")));
                    }
                }
                csv.meta.clone()
            }
        };
        let known = |column: &str, section: &str| {
            if meta_columns.iter().any(|m| m == column) {
                Ok(())
            } else {
                Err(invalid(format!(
                    "{section} refers to `{column}`, which is not a metadata column (have: {})",
                    meta_columns.join(", ")
                )))
            }
        };

        match &self.split {
            SplitConfig::Range { bounds } => {
                if bounds.is_empty() {
                    return Err(invalid("split.bounds is empty"));
                }
                for b in bounds {
                    match (b.lower, b.upper) {
                        (None, None) => return Err(invalid("split bound needs lower or upper")),
                        (Some(lo), Some(hi)) if !(lo < hi) => {
                            return Err(invalid("split bound needs lower < upper"));
                        }
                        (lo, hi) if lo.is_some_and(f64::is_nan) || hi.is_some_and(f64::is_nan) => {
                            return Err(invalid("split bound is NaN"));
                        }
                        _ => {}
                    }
                }
            }
            SplitConfig::Equality { .. } => {}
            SplitConfig::Rows { rows } => {
                if rows.is_empty() {
                    return Err(invalid("split.rows is empty"));
                }
            }
        }
        for column in self.split.columns() {
            known(column, "split")?;
        }

        let p = &self.partition;
        if p.k == Some(0) || p.k_values.as_ref().is_some_and(|ks| ks.contains(&0)) {
            return Err(invalid("partition K must be at least 1"));
        }
        if p.k_values.as_ref().is_some_and(Vec::is_empty) {
            return Err(invalid("partition.k_values is empty"));
        }
        if p.pca_components == Some(0) {
            return Err(invalid("partition.pca_components must be at least 1"));
        }
        if p.max_iters == 0 {
            return Err(invalid("partition.max_iters must be at least 1"));
        }
        let sweep = p.k_values.is_some();
        match p.method {
            PartitionKind::Metadata => {
                let column = p.column.as_deref().ok_or_else(|| invalid("metadata partition needs `column`"))?;
                known(column, "partition")?;
                let bounds = p
                    .boundaries
                    .as_ref()
                    .ok_or_else(|| invalid("metadata partition needs `boundaries`"))?;
                if bounds.windows(2).any(|w| !(w[0] < w[1])) || bounds.iter().any(|b| !b.is_finite()) {
                    return Err(invalid("partition.boundaries must be finite and strictly increasing"));
                }
                if let Some(k) = p.k {
                    if k != bounds.len() + 1 {
                        return Err(invalid(format!(
                            "partition.k = {k} but {} boundaries give K = {}",
                            bounds.len(),
                            bounds.len() + 1
                        )));
                    }
                }
                if sweep {
                    return Err(invalid("k_values only applies to kmeans and random partitions"));
                }
            }
            PartitionKind::Category => {
                let column = p.column.as_deref().ok_or_else(|| invalid("category partition needs `column`"))?;
                known(column, "partition")?;
                if sweep {
                    return Err(invalid("k_values only applies to kmeans and random partitions"));
                }
            }
            PartitionKind::Kmeans | PartitionKind::Random => {
                if p.k.is_some() == sweep {
                    return Err(invalid("kmeans and random partitions need exactly one of `k` and `k_values`"));
                }
                if p.method == PartitionKind::Kmeans && p.cluster_on.is_empty() {
                    return Err(invalid("partition.cluster_on is empty"));
                }
            }
        }
        if p.method != PartitionKind::Kmeans && p.pca_components.is_some() {
            return Err(invalid("pca_components only applies to kmeans partitions"));
        }

        if let Some(e) = &self.ensemble {
            e.to_config(0)
                .validate(1)
                .map_err(|err| invalid(format!("ensemble: {err}")))?;
        }
        if let Some(b) = &self.bandit {
            b.to_config(0, Policy::Thompson)
                .validate()
                .map_err(|err| invalid(format!("bandit: {err}")))?;
        }
        Ok(())
    }

    /// Validation plus the sections a given command needs.
    pub fn validate_for(&self, needs_ensemble: bool, needs_bandit: bool) -> Result<(), ConfigError> {
        self.validate()?;
        if needs_ensemble && self.ensemble.is_none() {
            return Err(invalid("this command needs an [ensemble] section"));
        }
        if needs_bandit && self.bandit.is_none() {
            return Err(invalid("this command needs a [bandit] section"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        method = "bandit"
        [data]
        kind = "simulate"
        variant = "time-invariant"
        [split]
        kind = "range"
        bounds = [{ column = "z", lower = 9.0 }]
        [partition]
        method = "metadata"
        column = "z"
        boundaries = [3.0, 5.0]
        [bandit]
        iterations = 5
        batch_size = 2
    "#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.repetitions, 1);
        assert_eq!(c.learner, LearnerConfig::default());
        assert_eq!(c.partition.k_list(), vec![Some(3)]);
        assert!(c.validate_for(true, false).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("batch_size = 2", "batch_size = 2\nbatchsize = 3");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn inconsistent_k_is_rejected() {
        let text = MINIMAL.replace("boundaries = [3.0, 5.0]", "boundaries = [3.0, 5.0]\nk = 4");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn zero_k_is_rejected() {
        let text = MINIMAL.replace(
            "method = \"metadata\"\n        column = \"z\"\n        boundaries = [3.0, 5.0]",
            "method = \"random\"\n        k = 0",
        );
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("at least 1"));
    }

    #[test]
    fn unknown_split_column_is_rejected() {
        let c = ExperimentConfig::from_toml(&MINIMAL.replace("{ column = \"z\",", "{ column = \"t\",")).unwrap();
        assert!(c.validate().is_err());
    }
}
