use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DsqError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A precondition of the called operation does not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("no valid map in family `{family}`: {reason}")]
    EmptyFamily { family: String, reason: String },

    #[error("unsupported domain: {0}")]
    Unsupported(String),

    #[error("invalid domain description: {0}")]
    InvalidDomain(String),
}

pub type Result<T, E = DsqError> = std::result::Result<T, E>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(DsqError::Contract(msg.into()))
}
