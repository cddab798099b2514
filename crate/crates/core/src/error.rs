use thiserror::Error;

/// Errors raised while building, checking, evaluating or serializing networks.
///
/// Layer indices are 1-based, matching the usual `[[W_1, b_1], ..., [W_K, b_K]]`
/// numbering of a network.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch at {at}: expected {expected}, found {found}")]
    DimensionMismatch {
        at: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite entry in layer {layer}")]
    NonFiniteEntry { layer: usize },

    #[error("depth mismatch: network {index} has depth {found}, expected {expected}")]
    DepthMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid selector: row {row} does not contain exactly one 1")]
    InvalidSelector { row: usize },

    #[error("input packing mismatch: {0}")]
    PackingMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
