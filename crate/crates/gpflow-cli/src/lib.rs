//! Experiment drivers, configuration, and file output around the `gpflow`
//! solver library. The binary in `main.rs` is a thin wrapper over
//! [`commands`].

pub mod commands;
pub mod config;
pub mod driver;
pub mod error;
pub mod output;
pub mod setup;

pub use error::CliError;
