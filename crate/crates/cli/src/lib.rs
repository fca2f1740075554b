//! Configuration loading, task orchestration and reporting for `cpairs`.

pub mod config;
pub mod report;
pub mod run;

pub use config::{load_config, parse_config, ConfigError, Issue, RunConfig};
pub use report::Format;
pub use run::{run, RunReport, TaskStatus};
