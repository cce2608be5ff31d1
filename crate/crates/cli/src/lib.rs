//! Command-line front end for the `g2beam` simulator: configuration files,
//! timestamp and curve formats, and the subcommand implementations.

pub mod commands;
pub mod config;
mod error;
pub mod formats;

pub use error::{CliError, Result};
