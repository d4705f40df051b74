use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A quantity fell between the "zero" and "nonzero" bands.
    #[error("numerical ambiguity: {0}")]
    Ambiguous(String),

    #[error("pole at z = {0}")]
    Pole(String),

    #[error("parity mismatch: {0}")]
    ParityMismatch(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("unsupported evaluation point: {0}")]
    Unsupported(String),

    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    pub fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
