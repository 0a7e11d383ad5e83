//! Command-line front end: configuration, subcommands and exit codes.

pub mod commands;
pub mod config;
pub mod error;

pub use config::RunConfig;
pub use error::CliError;
