use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// `Domain` is a violated precondition such as an out-of-range block size.
/// `Capacity` is a request beyond a configured dimension cap. `Integrity`
/// is an input or result that fails a numerical invariant check.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in `{field}`: {reason}")]
    Domain { field: &'static str, reason: String },

    #[error("capacity exceeded for `{field}`: requested {requested}, limit {limit}")]
    Capacity {
        field: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            field,
            reason: reason.into(),
        }
    }

    /// Name of the offending field, when the error carries one.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            Error::Domain { field, .. } | Error::Capacity { field, .. } => Some(field),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
