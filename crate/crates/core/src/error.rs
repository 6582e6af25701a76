use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong inside the library.
///
/// The split matters to callers: `Domain` errors mean the input was
/// well-formed but semantically invalid, while `Schema` errors mean the input
/// could not even be read as the expected structure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arithmetic overflow computing {0}")]
    Overflow(String),

    #[error("count vector has length {found}, scale has {expected} levels")]
    LengthMismatch { expected: usize, found: usize },

    #[error("scale mismatch: {0}")]
    ScaleMismatch(String),

    #[error("invalid estimate: {0}")]
    InvalidEstimate(String),

    #[error("{0}")]
    Domain(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("instance has {items} items, brute force is limited to {limit}")]
    TooLarge { items: usize, limit: usize },

    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by unreadable or malformed input rather than
    /// by well-formed input that violates a domain rule.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Schema { .. } | Error::Io(_))
    }
}
