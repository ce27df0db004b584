//! Numerical laboratory for quadratic curvature functionals
//! `F = ∫|Rm|² + s∫|Ric|² + τ∫R²` on compact Riemannian manifolds.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atlas;
pub mod chart;
pub mod cli;
pub mod error;
pub mod functionals;
pub mod jet;
pub mod linalg;
pub mod spectral;
pub mod tensor;
pub mod variation;

pub use error::{CurvError, Result};
pub use jet::Jet;
