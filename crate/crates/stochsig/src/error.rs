use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("interval mismatch: {0}")]
    IntervalMismatch(String),
    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(usize, usize),
    #[error("no evaluator for word {0}")]
    UnsupportedWord(String),
    #[error("solver needs step input `{0}`")]
    MissingInput(&'static str),
    #[error("{solver} requires additive noise")]
    WrongNoiseClass { solver: &'static str },
    #[error("non-finite state: {0}")]
    BlowUp(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
