//! File formats, experiment configuration and subcommands for the
//! `hjtorus` command-line tool.

pub mod commands;
pub mod config;
pub mod descriptor;
pub mod error;
pub mod io;
pub mod reports;

pub use config::{ExperimentConfig, Overrides};
pub use error::{CliError, Result};
