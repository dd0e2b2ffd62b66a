use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Every variant maps onto one of the CLI exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A configured size cap was exceeded (join, decomposition support, oracle size, ...).
    #[error("{what}-too-large: {actual} exceeds cap {cap}")]
    SizeCap {
        what: &'static str,
        actual: usize,
        cap: usize,
    },

    #[error("LP solver failure: {message} (after {rounds} rounds)")]
    Lp { message: String, rounds: usize },

    /// An internal consistency check failed. Signals a bug or a violated structural property.
    #[error("internal assertion failed: {0}")]
    Assertion(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInstance(_) | Error::Parse { .. } | Error::InvalidArgument(_) | Error::Io(_) => 2,
            Error::SizeCap { .. } => 3,
            Error::Lp { .. } | Error::Assertion(_) => 4,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
