//! Library side of the `freelab` command-line tool: configuration,
//! experiment pipelines and reports.

pub mod config;
pub mod error;
pub mod pipelines;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use pipelines::run;
pub use report::{emit_plot_data, RunReport};
