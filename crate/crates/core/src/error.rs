use thiserror::Error;

/// Errors raised while validating instances or evaluating schemes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PersuasionError {
    #[error("{field} must not be empty")]
    Empty { field: &'static str },

    #[error("{field}[{index}] is not a finite number")]
    NonFinite { field: &'static str, index: usize },

    #[error("prior entry must be positive (index {index}, got {value})")]
    NonPositivePrior { index: usize, value: f64 },

    #[error("{field}[{index}] must be non-negative (got {value})")]
    Negative { field: &'static str, index: usize, value: f64 },

    #[error("{field} must sum to 1 (got {sum})")]
    NotNormalized { field: &'static str, sum: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },

    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid grid instance: {0}")]
    InvalidGrid(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),
}

pub type Result<T> = std::result::Result<T, PersuasionError>;

pub(crate) fn check_range(name: &'static str, value: f64, ok: bool, range: &'static str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(PersuasionError::OutOfRange { name, value, range })
    }
}
