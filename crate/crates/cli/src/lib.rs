//! Experiment harness: every command maps an [`config::ExperimentConfig`]
//! to an [`record::ExperimentRecord`] plus a JSON or CSV artifact.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod invariants;
pub mod json;
pub mod pairs;
pub mod record;
pub mod report;
pub mod sweep;

pub use cli::run_cli;
pub use config::{CommandKind, ExperimentConfig};
pub use error::CliError;
pub use experiments::{execute, Outcome};
pub use record::{ExperimentRecord, Measurement};
