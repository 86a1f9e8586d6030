use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("empty multiset")]
    EmptyMultiset,
    #[error("expansion of size {size} exceeds limit {limit}")]
    CapExceeded { size: u128, limit: u128 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate family: {0}")]
    Degenerate(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("numerical inconsistency: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
