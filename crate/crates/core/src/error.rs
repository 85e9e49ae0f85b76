use thiserror::Error;

/// Errors raised by the covering toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A density, sequence or measure could not be constructed.
    #[error("invalid construction: {0}")]
    Construction(String),

    /// A precondition of an estimator does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical procedure could not reach the requested accuracy.
    #[error("resolution too coarse: {0}")]
    Resolution(String),

    /// Spec strings, density files and config files.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn construction(msg: impl Into<String>) -> Error {
    Error::Construction(msg.into())
}
