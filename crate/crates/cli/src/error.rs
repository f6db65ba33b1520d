use std::fmt::Display;
use std::process::ExitCode;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, configuration, manifest or unreadable input. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Validation or numerical failure on valid input. Exit code 1.
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Domain(_) => ExitCode::from(1),
        }
    }
}

/// Wraps an error as a usage failure, prefixed with `context`.
pub fn usage<E: Display>(context: impl Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Usage(format!("{context}: {e}"))
}

/// Wraps an error as a domain failure, prefixed with `context`.
pub fn domain<E: Display>(context: impl Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Domain(format!("{context}: {e}"))
}
