//! File formats, configuration, manifests and subcommands of the `asi`
//! command-line tool.

pub mod cli;
pub mod commands;
pub mod config;
mod error;
pub mod formats;
pub mod manifest;
pub mod parallel;
pub mod scenario;

pub use error::{CliError, CliResult};
