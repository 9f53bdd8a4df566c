//! File formats, configuration and the experiment runner behind the `subsel`
//! command. The selection methods themselves live in `subsel_core`.

pub mod artifacts;
pub mod config;
pub mod csv_io;
pub mod pipeline;
pub mod presets;
pub mod report;

pub use config::{ConfigError, ExperimentConfig};
pub use pipeline::{execute, Command, Comparison, PairedRun, RunError, RunOutcome};
