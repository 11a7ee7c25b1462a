//! Batch experiment runner for the KP-II control laboratory: strict JSON
//! configuration, subcommand dispatch, deterministic seeding and CSV/JSON
//! emission with a manifest tying every output to its configuration.

pub mod config;
pub mod runner;
pub mod selftest;

pub use config::{parse_config, ConfigError, ExperimentConfig, ExperimentKind, Violation};
pub use runner::{run_experiment, RunError, RunOutcome};
