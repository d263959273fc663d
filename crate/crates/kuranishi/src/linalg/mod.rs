//! Exact linear algebra over a `Field`.

mod matrix;
mod subspace;

pub use matrix::Matrix;
pub use subspace::{filtration_basis, invert, solve, BasisCoords, QuotientSpace, Solver, Subspace};


#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("divisor basis vector {0} is not contained in the numerator")]
    NotContained(usize),
    #[error("vector does not lie in the numerator subspace")]
    NotInNumerator,
    #[error("vectors are linearly dependent")]
    Dependent,
}
