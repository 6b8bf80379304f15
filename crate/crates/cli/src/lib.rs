//! Configuration, orchestration and reporting for the `hdirac` binary.

pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig};
pub use report::Report;
pub use run::{run_suite, Suite};
