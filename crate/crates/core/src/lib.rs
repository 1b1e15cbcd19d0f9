//! Simulator for clustered quantum federated learning.
//!
//! Devices train small variational quantum classifiers on non-IID shards.
//! The baseline protocol trains every device each round and averages; the
//! clustered protocol groups devices by their parameters and trains one
//! representative per group, then spreads its model through the group.

pub mod cluster;
pub mod comm;
pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod optim;
pub mod orchestrator;
pub mod report;
pub mod statevec;
pub mod tolerance;
pub mod vqc;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentRun};
