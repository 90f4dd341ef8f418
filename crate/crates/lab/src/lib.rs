//! Experiment runner tying wave simulations to their Kac-Rice predictions.
//!
//! An [`ExperimentConfig`] names one experiment of the catalog together with
//! its parameters and a master seed; [`run`] produces an [`ExperimentReport`]
//! whose numerical payload depends only on the config.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::{Experiment, ExperimentConfig, EXPERIMENT_IDS};
pub use error::{LabError, Result};
pub use experiments::{run, run_with_workers, RunOptions};
pub use report::{ExperimentReport, Payload, Table, SCHEMA_VERSION};
