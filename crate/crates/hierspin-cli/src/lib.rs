//! Configuration parsing and experiment orchestration for the `hierspin` binary.

pub mod config;
pub mod run;

pub use config::{canonical, parse_config, ConfigError, ExperimentConfig, Kind, Parsed};
pub use run::{config_hash, run_experiment, RunError, RunReport};
