//! Configuration, sweeps and reports behind the `throughput` command.

pub mod app;
pub mod config;
pub mod error;
pub mod figures;
pub mod format;
pub mod run;
pub mod sweep;

pub use config::RunConfig;
pub use error::CliError;
pub use run::{compute, simulate, validate, Report, RunOptions, Table};
