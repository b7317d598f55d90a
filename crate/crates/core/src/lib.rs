//! Sparse forward-mode automatic differentiation built on a dependency-
//! tracking scalar algebra.
//!
//! One residual evaluation with [`ADScalar`] yields residual values, the
//! Jacobian sparsity pattern and the sparse Jacobian itself. Around that
//! core sit a sparse LU solver, a Newton solver, a fixed-step implicit
//! Euler DAE integrator, benchmark models and a small benchmarking harness.
//!
//! ```
//! use sad_core::structure::{assemble_csr, extract_pattern};
//! use sad_core::{ADScalar, Scalar};
//!
//! let x = ADScalar::variable(2.0, 0);
//! let y = ADScalar::variable(3.0, 1);
//! let f = vec![x.clone() * &y, y.sin()];
//! assert_eq!(extract_pattern(&f, 2).unwrap().rows(), &[vec![0, 1], vec![1]]);
//! let jac = assemble_csr(&f, 2).unwrap();
//! assert_eq!((jac.get(0, 0), jac.get(0, 1), jac.get(1, 0)), (3.0, 2.0, 0.0));
//! assert_eq!(jac.get(1, 1), 3f64.cos());
//! ```

pub mod ad;
pub mod bench;
pub mod linalg;
pub mod models;
pub mod solvers;
pub mod structure;

pub use ad::{ADScalar, AdError, DenseADScalar, Scalar, UnaryFn};
