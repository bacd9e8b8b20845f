use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive definite (min eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),

    #[error("measurement is incomplete: max |sum A^dag A - Id| = {0:.3e}")]
    Incomplete(f64),

    #[error("Kraus operator {0} is zero")]
    ZeroOperator(usize),

    #[error("empty Kraus set")]
    EmptyKraus,

    #[error("Kraus operator {0} is not diagonal; use the general-purpose metrics instead")]
    NotDiagonal(usize),

    #[error("dimension n = {0} is not supported (need n >= 2)")]
    BadDimension(usize),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("{name} = {value} outside admissible range [{lo}, {hi}]")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("could not draw a normalizable random measurement after {0} attempts")]
    RedrawExhausted(usize),

    #[error("outcome probabilities sum to {0}, attack is broken")]
    BrokenAttack(f64),

    #[error("bound violated by {margin:.3e} for {source_tag}: implementation bug")]
    BoundViolation { margin: f64, source_tag: String },

    #[error("cannot parse attack descriptor `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
