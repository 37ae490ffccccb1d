//! Std companion to `sysid-core`: configuration loading, CSV/JSON/SVG
//! artifacts, the scenario sweep harness, and the `sysid` binary's command
//! implementations.
//!
//! Everything here is deterministic given the config: a fixed seed produces
//! bit-identical CSVs, JSON reports, and SVG figures.

use std::fmt;

pub mod commands;
pub mod config;
pub mod csvio;
pub mod harness;
pub mod schema;
pub mod svg;

/// Errors carrying the binary's stable exit codes: 2 for configuration
/// problems, 3 for missing or malformed data.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
