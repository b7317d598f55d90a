//! Elementary functions supported by the scalar algebra and their derivatives.

use std::fmt;

use super::AdError;

/// Tolerance on `|cos x|` below which `tan x` is treated as a pole.
const TAN_POLE_TOL: f64 = 1e-12;

/// `1 / ln(10)`.
const INV_LN_10: f64 = 0.4342944819032518;

/// Identifier of a supported single-argument function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryFn {
    Sin,
    Cos,
    Tan,
    Asin,
    Acos,
    Atan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Ln,
    Log10,
    Sqrt,
    Abs,
}

impl UnaryFn {
    pub const ALL: [UnaryFn; 14] = [
        UnaryFn::Sin,
        UnaryFn::Cos,
        UnaryFn::Tan,
        UnaryFn::Asin,
        UnaryFn::Acos,
        UnaryFn::Atan,
        UnaryFn::Sinh,
        UnaryFn::Cosh,
        UnaryFn::Tanh,
        UnaryFn::Exp,
        UnaryFn::Ln,
        UnaryFn::Log10,
        UnaryFn::Sqrt,
        UnaryFn::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Tan => "tan",
            UnaryFn::Asin => "asin",
            UnaryFn::Acos => "acos",
            UnaryFn::Atan => "atan",
            UnaryFn::Sinh => "sinh",
            UnaryFn::Cosh => "cosh",
            UnaryFn::Tanh => "tanh",
            UnaryFn::Exp => "exp",
            UnaryFn::Ln => "log",
            UnaryFn::Log10 => "log10",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Abs => "abs",
        }
    }

    /// Function value at `x`.
    pub fn eval(self, x: f64) -> f64 {
        match self {
            UnaryFn::Sin => x.sin(),
            UnaryFn::Cos => x.cos(),
            UnaryFn::Tan => x.tan(),
            UnaryFn::Asin => x.asin(),
            UnaryFn::Acos => x.acos(),
            UnaryFn::Atan => x.atan(),
            UnaryFn::Sinh => x.sinh(),
            UnaryFn::Cosh => x.cosh(),
            UnaryFn::Tanh => x.tanh(),
            UnaryFn::Exp => x.exp(),
            UnaryFn::Ln => x.ln(),
            UnaryFn::Log10 => x.log10(),
            UnaryFn::Sqrt => x.sqrt(),
            UnaryFn::Abs => x.abs(),
        }
    }

    /// First derivative at `x`.
    ///
    /// `abs` uses `-1` at the kink, so `abs'(0) == -1`.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            UnaryFn::Sin => x.cos(),
            UnaryFn::Cos => -x.sin(),
            UnaryFn::Tan => {
                let c = x.cos();
                1.0 / (c * c)
            }
            UnaryFn::Asin => 1.0 / (1.0 - x * x).sqrt(),
            UnaryFn::Acos => -1.0 / (1.0 - x * x).sqrt(),
            UnaryFn::Atan => 1.0 / (1.0 + x * x),
            UnaryFn::Sinh => x.cosh(),
            UnaryFn::Cosh => x.sinh(),
            UnaryFn::Tanh => {
                let c = x.cosh();
                1.0 / (c * c)
            }
            UnaryFn::Exp => x.exp(),
            UnaryFn::Ln => 1.0 / x,
            UnaryFn::Log10 => INV_LN_10 / x,
            UnaryFn::Sqrt => 0.5 / x.sqrt(),
            UnaryFn::Abs => {
                if x > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Returns a domain error if `x` lies outside the set where the
    /// function and its derivative are finite.
    pub fn check_domain(self, x: f64) -> Result<(), AdError> {
        let ok = match self {
            UnaryFn::Ln | UnaryFn::Log10 => x > 0.0,
            UnaryFn::Sqrt => x >= 0.0,
            UnaryFn::Asin | UnaryFn::Acos => (-1.0..=1.0).contains(&x),
            UnaryFn::Tan => x.cos().abs() >= TAN_POLE_TOL,
            _ => !x.is_nan(),
        };
        if ok {
            Ok(())
        } else {
            Err(AdError::Domain {
                op: self.name(),
                value: x,
            })
        }
    }
}

impl fmt::Display for UnaryFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
