use thiserror::Error;

/// Errors raised by the toolkit. Numerical checks that fail are not errors;
/// they come back as reports with `pass == false`.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("band set mismatch: {0}")]
    BandMismatch(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("window construction produced a negative radicand ({0:e})")]
    NegativeRadicand(f64),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
