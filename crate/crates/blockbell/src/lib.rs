//! File formats and command-line workflows on top of `blockbell-core`.

pub mod cli;
pub mod error;
pub mod report;
pub mod strategy_file;

pub use error::CliError;
