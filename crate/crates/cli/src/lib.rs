//! Batch front end for `dicke-core`: resolves a run configuration, drives
//! the scans and writes CSV, JSON and SVG artifacts.
//!
//! Exit codes: 0 success, 1 configuration or output error, 2 numerical
//! failure.

// `!(x > 0.0)` is the NaN-rejecting form used throughout input validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
pub mod svg;

use std::path::PathBuf;

pub use config::{Cli, Command, Flags, RunConfig};
pub use run::run;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{command}: {source}")]
    Numerical { command: &'static str, source: dicke_core::Error },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numerical { source: dicke_core::Error::InvalidParameter { .. }, .. } => 1,
            CliError::Numerical { .. } => 2,
        }
    }
}
