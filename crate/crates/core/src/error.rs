use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("division by zero in GF(2^{w})")]
    DivisionByZero { w: u8 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("insufficient data: need {needed} points, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("decode failure: {0}")]
    DecodeFailure(String),

    #[error("expander construction failed after {attempts} attempts (best lambda {best_lambda:.4}, threshold {threshold:.4})")]
    ConstructionFailure {
        attempts: u32,
        best_lambda: f64,
        threshold: f64,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("parameter digest mismatch between sketch and schedule")]
    DigestMismatch,

    #[error("malformed sketch file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

