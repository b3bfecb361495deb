//! Library side of the `entsim` command: configuration and run orchestration.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_with_overrides, ConfigError, Mode, Overrides, RunConfig};
pub use run::{run, RunError, RunOutput};
