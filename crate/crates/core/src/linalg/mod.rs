//! Sparse LU factorization with partial pivoting over [`CsrMatrix`], plus a
//! dense reference solver.

mod dense;
mod lu;

pub use dense::{dense_solve, DenseMatrix};
pub use lu::{lu_factor, lu_solve, LuFactors};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular at elimination step {step}")]
    Singular { step: usize },
}
