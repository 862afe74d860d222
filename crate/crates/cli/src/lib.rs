//! Declarative experiment runner around the `drfs` library: parse a config,
//! generate or load data, optimize and select per seed, run the baselines,
//! evaluate downstream, and write a report bundle.

pub mod config;
pub mod error;
pub mod gradcheck;
pub mod report;
pub mod run;

pub use config::{load_config, parse_config, validate, Diagnostic, ExperimentConfig};
pub use error::{exit, CliError};
pub use run::{run_experiment, write_bundle, RunOptions, RunOutput};
