use thiserror::Error;

/// Errors produced by the `ordstat` library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid order-statistic indices (i={i}, j={j}, n={n}); need 1 <= i < j <= n")]
    InvalidIndices { i: usize, j: usize, n: usize },

    #[error("enumeration of {outcomes} outcomes exceeds budget {budget}")]
    BudgetExceeded { outcomes: String, budget: u64 },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
