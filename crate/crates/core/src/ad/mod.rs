//! Abstract scalar algebra for forward-mode automatic differentiation.
//!
//! Model code is written once, generic over [`Scalar`], and instantiated with
//! - `f64` for plain residual evaluation,
//! - [`ADScalar`] to obtain residual values, sparsity pattern and sparse
//!   Jacobian rows in a single pass,
//! - [`DenseADScalar`] as a dense-gradient baseline for benchmarking.

mod dense;
mod deps;
mod math;
mod scalar;

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub use dense::DenseADScalar;
pub use deps::DependencyMap;
pub use math::UnaryFn;
pub use scalar::{apply_unary, arith, ADScalar, BinaryOp};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdError {
    #[error("{op}: argument {value} outside the function domain")]
    Domain { op: &'static str, value: f64 },
    #[error("{op}: division by zero")]
    DivisionByZero { op: &'static str },
}

/// Scalar type a residual model can be evaluated with.
///
/// Arithmetic with plain `f64` constants is available on the right-hand
/// side. Elementary functions follow IEEE semantics here; use
/// [`apply_unary`] for a domain-checked variant on [`ADScalar`].
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// A constant carrying no derivative information.
    fn constant(value: f64) -> Self;

    fn value(&self) -> f64;

    fn apply(&self, f: UnaryFn) -> Self;

    fn sin(&self) -> Self {
        self.apply(UnaryFn::Sin)
    }
    fn cos(&self) -> Self {
        self.apply(UnaryFn::Cos)
    }
    fn tan(&self) -> Self {
        self.apply(UnaryFn::Tan)
    }
    fn asin(&self) -> Self {
        self.apply(UnaryFn::Asin)
    }
    fn acos(&self) -> Self {
        self.apply(UnaryFn::Acos)
    }
    fn atan(&self) -> Self {
        self.apply(UnaryFn::Atan)
    }
    fn sinh(&self) -> Self {
        self.apply(UnaryFn::Sinh)
    }
    fn cosh(&self) -> Self {
        self.apply(UnaryFn::Cosh)
    }
    fn tanh(&self) -> Self {
        self.apply(UnaryFn::Tanh)
    }
    fn exp(&self) -> Self {
        self.apply(UnaryFn::Exp)
    }
    fn ln(&self) -> Self {
        self.apply(UnaryFn::Ln)
    }
    fn log10(&self) -> Self {
        self.apply(UnaryFn::Log10)
    }
    fn sqrt(&self) -> Self {
        self.apply(UnaryFn::Sqrt)
    }
    fn abs(&self) -> Self {
        self.apply(UnaryFn::Abs)
    }
}

impl Scalar for f64 {
    #[inline]
    fn constant(value: f64) -> Self {
        value
    }

    #[inline]
    fn value(&self) -> f64 {
        *self
    }

    #[inline]
    fn apply(&self, f: UnaryFn) -> Self {
        f.eval(*self)
    }
}
