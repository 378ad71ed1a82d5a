use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample {value} at node {node:?}")]
    NonFiniteSample { node: Vec<usize>, value: f64 },

    #[error("exponent relation violated: {0}")]
    Relation(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("empty cube family")]
    EmptyFamily,

    #[error("zero mode has mean {mean:e}; subtract the mean or select the drop-zero-mode policy")]
    ZeroMode { mean: f64 },

    #[error("invalid heights: {0}")]
    InvalidHeights(String),

    #[error("iteration diverged after {iterations} steps")]
    Diverged {
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("corpus: {0}")]
    Corpus(String),

    #[error("format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn relation(msg: impl Into<String>) -> Error {
    Error::Relation(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
