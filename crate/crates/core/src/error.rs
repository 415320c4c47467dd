//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller asked for zero subjects, zero rows, or an otherwise empty input.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Input sequence shorter than the operation requires.
    #[error("input too short: need at least {need} samples, got {got}")]
    TooShort { need: usize, got: usize },

    /// Row/column/mask dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A config value violates its documented range or is missing.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Data on disk (or passed in) is structurally broken.
    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code category: 1 for usage/config problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 1,
            _ => 2,
        }
    }
}
