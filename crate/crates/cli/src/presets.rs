//! Named configurations shipped with the tool.
//!
//! Presets that read files use a data path relative to the working directory;
//! an environment variable can point them elsewhere.

use std::path::PathBuf;

use crate::config::{ConfigError, DataConfig, ExperimentConfig};

pub const NAMES: &[&str] = &[
    "sim-time-varying",
    "sim-time-invariant",
    "california",
    "features-kmeans",
    "features-hospital",
];

/// Environment variable overriding the California housing CSV location.
pub const CALIFORNIA_ENV: &str = "SUBSEL_CALIFORNIA_CSV";
/// Environment variable overriding the precomputed-features CSV location.
pub const FEATURES_ENV: &str = "SUBSEL_FEATURES_CSV";

pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "sim-time-varying" => include_str!("../presets/sim-time-varying.toml"),
        "sim-time-invariant" => include_str!("../presets/sim-time-invariant.toml"),
        "california" => include_str!("../presets/california.toml"),
        "features-kmeans" => include_str!("../presets/features-kmeans.toml"),
        "features-hospital" => include_str!("../presets/features-hospital.toml"),
        _ => return None,
    })
}

/// Parses a preset and applies its data-path environment override.
pub fn load(name: &str) -> Result<ExperimentConfig, ConfigError> {
    let text = source(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
    let mut config = ExperimentConfig::from_toml(text)?;
    let env = match name {
        "california" => Some(CALIFORNIA_ENV),
        "features-kmeans" | "features-hospital" => Some(FEATURES_ENV),
        _ => None,
    };
    if let (Some(var), DataConfig::Csv(csv)) = (env, &mut config.data) {
        if let Some(path) = std::env::var_os(var).filter(|p| !p.is_empty()) {
            csv.path = PathBuf::from(path);
        }
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_validates() {
        for name in NAMES {
            let config = load(name).unwrap();
            config.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(config.name.as_deref(), Some(*name));
        }
        assert!(matches!(load("nope"), Err(ConfigError::UnknownPreset(_))));
    }

    #[test]
    fn simulation_preset_parameters() {
        let c = load("sim-time-varying").unwrap();
        let e = c.ensemble.as_ref().unwrap();
        let b = c.bandit.as_ref().unwrap();
        assert_eq!((c.partition.k_list(), e.trials, e.n_training), (vec![Some(3)], 1000, 1000));
        assert_eq!((b.iterations, b.batch_size), (30, 10));
    }

    #[test]
    fn california_preset_sweeps_k() {
        let c = load("california").unwrap();
        let ks: Vec<_> = c.partition.k_list().into_iter().flatten().collect();
        assert_eq!(ks, vec![2, 3, 4, 5]);
        let e = c.ensemble.as_ref().unwrap();
        let b = c.bandit.as_ref().unwrap();
        assert_eq!((e.trials, e.n_training, b.iterations, b.batch_size), (200, 200, 200, 20));
    }
}
