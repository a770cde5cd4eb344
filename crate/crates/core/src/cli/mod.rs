//! Configuration, CSV output and command dispatch behind the `umzi-qkd` binary.

pub mod config;
pub mod csv;
pub mod run;

pub use config::{parse_config, Command, ConfigError, Overrides, RunConfig};
pub use run::{run, CliError};
