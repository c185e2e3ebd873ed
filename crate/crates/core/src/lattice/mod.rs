//! Exact integer linear algebra: determinants, Smith and Hermite normal forms,
//! integral kernels and saturation tests.
//!
//! Everything runs on arbitrary-precision integers; nothing here can overflow.

mod hermite;
mod matrix;
mod snf;

use thiserror::Error;

pub use hermite::hermite_normal_form;
pub use matrix::IntegerMatrix;
pub use snf::{
    determinant, gcd_of, invariant_factors, is_primitive, is_saturated, kernel_basis, rank,
    saturation, smith_normal_form, unimodular_inverse, SnfResult,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not unimodular")]
    NotUnimodular,
}
