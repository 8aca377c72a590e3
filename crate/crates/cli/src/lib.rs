//! Command-line front end, data ingestion and the simulation harness.
//!
//! The binary `wim` is a thin wrapper around [`commands::run`]; everything it
//! does is also reachable from this library, which is how the acceptance
//! suite drives the experiments.

pub mod commands;
pub mod data;
pub mod demo;
pub mod harness;
pub mod output;
pub mod prior;
pub mod spec;

use thiserror::Error;
use wim_core::WimError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed input: arguments, prior strings, datasets, spec files.
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Numeric(#[from] WimError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for input and validation problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Numeric(WimError::InvalidParameter(_)) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv error: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
