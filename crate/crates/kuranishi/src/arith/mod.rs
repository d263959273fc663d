//! Exact scalar and polynomial arithmetic over Q.

mod field;
mod ratfunc;
mod truncated;
mod unipoly;

pub use field::{is_negative, parse_rational, q, qi, render_rational, Field, Rational};
pub use ratfunc::RatFunc;
pub use truncated::{default_names, monomials_of_degree, monomials_up_to, Mono, TruncatedPoly};
pub use unipoly::UniPoly;
pub(crate) use unipoly::push_term;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("constant term is zero; not a unit")]
    NotAUnit,
    #[error("out of range: {0}")]
    Range(String),
    #[error("division by zero")]
    DivisionByZero,
}
