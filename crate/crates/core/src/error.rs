use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coefficient at index {index}")]
    NonFinite { index: usize },

    #[error("index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension {0} outside the supported range 1..={max}", max = crate::space::MAX_DIM)]
    BadDimension(usize),

    #[error("invalid space descriptor: {0}")]
    Descriptor(String),

    #[error("norm validation failed: {0}")]
    NormAxiom(String),

    #[error("sign vector does not match its support set")]
    SignMismatch,

    #[error("gap sequence must be strictly increasing within 1..={dim}")]
    BadGaps { dim: usize },

    #[error("the closed-form path needs a separable lattice norm")]
    FastPathUnavailable,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
