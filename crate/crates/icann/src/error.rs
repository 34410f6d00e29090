use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: icann_core::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, msg: impl Into<String>) -> Self {
        CliError::Format {
            path: path.to_path_buf(),
            msg: msg.into(),
        }
    }

    pub fn model(context: impl Into<String>, source: icann_core::Error) -> Self {
        CliError::Model {
            context: context.into(),
            source,
        }
    }

    /// Process exit status.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Format { .. } => 5,
            CliError::Model { .. } => 6,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
