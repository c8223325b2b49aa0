//! Experiment harness: baselines, scaling-factor scans, schedule tuning and
//! method comparison on random graphs, driven by one top-level seed.

pub mod compare;
pub mod config;
pub mod error;
pub mod experiment;
pub mod export;
pub mod params;
pub mod registry;
pub mod seeds;
pub mod tuning;
pub mod workspace;

pub use config::{ExperimentConfig, Method, Role};
pub use error::{LabError, Result};
