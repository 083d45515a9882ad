//! Configuration-driven experiment runner.

pub mod config;
pub mod experiment;
pub mod identities;
pub mod io;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use experiment::{Assertion, Experiment, Outcome, Registry, RunError};
