use std::io;
use std::path::PathBuf;

use gpn_core::GpnError;
use thiserror::Error;

/// Failures of a command, each mapped to a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration file, flag or argument (exit code 2).
    #[error("config error: {0}")]
    Config(String),

    /// Unreadable or malformed input data (exit code 3).
    #[error("data error: {0}")]
    Data(String),

    /// A computation failed (exit code 4).
    #[error("numerical failure: {0}")]
    Numerical(GpnError),

    /// Reading or writing a file failed (exit code 3).
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<GpnError> for CliError {
    /// Data-shape problems detected during fitting stay data errors.
    fn from(e: GpnError) -> Self {
        match e {
            GpnError::DegenerateTreatment(_) | GpnError::InvalidData(_) => CliError::Data(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
