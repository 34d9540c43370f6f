use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the construction and verification routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, found {found})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is singular to tolerance (pivot {pivot:e} at column {column})")]
    Singular { pivot: f64, column: usize },

    #[error("vector is not a unit vector (norm {norm})")]
    NonUnitVector { norm: f64 },

    #[error("inadmissible basis word: {0}")]
    InadmissibleWord(String),

    #[error("operation requires a {expected}-side basis")]
    WrongBasisSide { expected: &'static str },

    #[error("operator sequence does not alternate at position {position}")]
    NotAlternating { position: usize },

    #[error("operator at position {position} is not centered (vacuum expectation {value})")]
    NotCentered { position: usize, value: Complex64 },

    #[error("requested length {requested} exceeds truncation depth {depth}")]
    DepthExceeded { requested: usize, depth: usize },

    /// The value was computed, but on a truncated space where it is not exact.
    #[error("product of length {len} exceeds depth {depth}; truncated value {value}")]
    BeyondDepth {
        value: Complex64,
        len: usize,
        depth: usize,
    },

    #[error("argument outside the guarded domain: {0}")]
    Domain(String),

    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("pole of order one did not cancel (residual {residual:e})")]
    PoleNotCancelled { residual: f64 },

    #[error("invalid series operand: {0}")]
    InvalidSeries(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
