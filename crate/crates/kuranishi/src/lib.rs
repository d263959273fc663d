//! Exact deformation theory of vector bundles and meromorphic connections on
//! the projective line and Legendre elliptic curves.

pub mod arith;
pub mod bundle;
pub mod cech;
pub mod curve;
pub mod kuranishi;
pub mod linalg;
pub mod parabolic;
pub mod report;
pub mod sections;

pub use arith::Rational;
pub type QPoly = arith::TruncatedPoly<Rational>;
pub type QMatrix = linalg::Matrix<Rational>;
