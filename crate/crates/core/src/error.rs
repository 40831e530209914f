use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("zero diagonal entry at index {index}")]
    ZeroDiagonal { index: usize },
    #[error("conjugate gradient breakdown at iteration {iteration} (curvature {curvature})")]
    Breakdown { iteration: usize, curvature: f64 },
    #[error("reciprocal domain error: input {0} is not positive")]
    Domain(f64),
    #[error("no closed-form complexity for {0}")]
    NoFormula(String),
}

pub type Result<T> = std::result::Result<T, Error>;
