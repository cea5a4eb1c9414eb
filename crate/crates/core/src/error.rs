use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the CLI exit-code contract: configuration and usage
/// problems are caller mistakes (exit 2), domain and I/O failures are runtime
/// problems (exit 3).
#[derive(Debug, Error)]
pub enum Error {
    /// A probe or protocol configuration violates one of its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An operation was called outside its precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// A closed-form evaluation left its domain of validity.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by the caller's input rather than the run.
    pub fn is_user_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Usage(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
