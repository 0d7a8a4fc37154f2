use thiserror::Error;

/// Errors produced by the spectral clustering pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a precondition (non-finite values, bad parameters).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numeric parameter is outside its allowed range.
    #[error("out of range: {0}")]
    Range(String),

    /// Mismatched dimensions or grids between operands.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Not enough data to carry out the operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A stochastic generation step failed to produce a valid draw.
    #[error("generation failure: {0}")]
    Generation(String),

    /// Numerical failure during computation.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
