use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("capacity exceeded for `{field}`: requested {requested}, limit {limit}")]
    Capacity {
        field: String,
        requested: usize,
        limit: usize,
    },

    #[error("unknown experiment `{name}`{hint}")]
    UnknownExperiment { name: String, hint: String },

    #[error(transparent)]
    Core(psym_core::Error),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } | CliError::UnknownExperiment { .. } => 2,
            CliError::Capacity { .. } => 3,
            _ => 1,
        }
    }
}

impl From<psym_core::Error> for CliError {
    fn from(e: psym_core::Error) -> Self {
        match e {
            psym_core::Error::Domain { field, reason } => CliError::validation(field, reason),
            psym_core::Error::Capacity { field, requested, limit } => CliError::Capacity {
                field: field.into(),
                requested,
                limit,
            },
            other => CliError::Core(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
