//! Library half of the `infosel` command-line tool.

pub mod commands;
pub mod config;
pub mod heatmap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input files, flags or configuration. Exit code 2.
    #[error("{0}")]
    Input(String),
    /// Valid input on which the analysis is undefined. Exit code 1.
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl From<infosel_core::Error> for CliError {
    fn from(e: infosel_core::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Domain(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
