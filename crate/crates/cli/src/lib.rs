//! Command-line companion to `nldist-core`: on-disk JSON/CSV formats,
//! seeded box sampling, the self-verification suite, and the subcommand
//! implementations behind the `nldist` binary.

pub mod commands;
pub mod formats;
pub mod numfmt;
pub mod sampling;
pub mod verify;

use thiserror::Error;

/// CLI failure carrying its process exit code: bad flags or malformed
/// inputs exit 2, runtime and verification failures exit 1. A closed
/// stdout (`nldist ... | head`) is not a failure; it maps to the silent
/// `Pipe` variant and exit 0.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    #[error("broken pipe")]
    Pipe,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn failure(message: impl Into<String>) -> Self {
        CliError::Failure(message.into())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
            CliError::Pipe => 0,
        }
    }
}

impl From<nldist_core::Error> for CliError {
    fn from(e: nldist_core::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            CliError::Pipe
        } else {
            CliError::Failure(e.to_string())
        }
    }
}
