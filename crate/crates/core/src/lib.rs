//! Selection and reweighting of source-data subsets for a target prediction task.
//!
//! The source data is split into `K` subsets (by metadata, clustering, or at
//! random) and a learner is trained on mixtures of those subsets. Two search
//! strategies are provided:
//!
//! - [`ensemble`]: random search over Dirichlet(1, ..., 1) weightings, keeping the
//!   weighting whose subsample gives the lowest target loss.
//! - [`bandit`]: sequential batch selection with Beta-Bernoulli Thompson sampling,
//!   rewarding an arm whenever its batch strictly improves the target metric.
//!
//! [`diagnostics`] turns weightings into the nonuniformity statistic and the
//! tables used for plotting, and [`simgen`] generates the time-varying and
//! time-invariant regression simulations.
//!
//! The crate is `no_std` and only needs an allocator. File formats, configuration
//! and the command line live in the `subsel` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bandit;
pub mod dataset;
pub mod diagnostics;
pub mod ensemble;
mod error;
pub mod learner;
pub mod linalg;
pub mod partition;
pub mod rng;
pub mod simgen;

pub use error::{Error, Result};
