//! Sparse derivative-carrying scalar.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use super::{AdError, DependencyMap, Scalar, UnaryFn};

/// A real value together with its sparse set of dependencies on the
/// independent variables and the partial derivative for each.
///
/// The key set of `deps` is the structural dependency set: binary
/// operations always take the union of their operands' keys, even when a
/// resulting derivative is numerically zero.
///
/// Cloning yields a temporary: value and dependencies are copied, the
/// variable number and the fixed flag are not.
#[derive(Debug, Default)]
pub struct ADScalar {
    value: f64,
    var_id: Option<usize>,
    fixed: bool,
    deps: DependencyMap,
}

impl Clone for ADScalar {
    fn clone(&self) -> Self {
        Self {
            value: self.value,
            var_id: None,
            fixed: false,
            deps: self.deps.clone(),
        }
    }
}

impl ADScalar {
    /// A temporary holding `value` with no dependencies.
    ///
    /// This is the only way to lift a plain real into the algebra; there is
    /// no implicit conversion.
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            ..Self::default()
        }
    }

    /// A constant parameter: flagged fixed, never carries dependencies.
    pub fn fixed(value: f64) -> Self {
        Self {
            value,
            fixed: true,
            ..Self::default()
        }
    }

    /// Independent variable number `id` with seed derivative 1.
    pub fn variable(value: f64, id: usize) -> Self {
        let mut s = Self::constant(value);
        s.set_variable_number(id);
        s
    }

    /// A temporary with a single dependency `(id, derivative)`.
    ///
    /// Used to seed derivative directions other than 1, e.g. the
    /// `alpha`-scaled time-derivative arguments of a DAE residual.
    pub fn seeded(value: f64, id: usize, derivative: f64) -> Self {
        let mut s = Self::constant(value);
        s.deps.insert(id, derivative);
        s
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn set_value(&mut self, value: f64) {
        self.value = value;
    }

    pub fn var_id(&self) -> Option<usize> {
        self.var_id
    }

    pub fn is_registered(&self) -> bool {
        self.var_id.is_some()
    }

    pub fn is_fixed(&self) -> bool {
        self.fixed
    }

    pub fn deps(&self) -> &DependencyMap {
        &self.deps
    }

    /// Partial derivative with respect to variable `id` (0 if absent).
    pub fn der(&self, id: usize) -> f64 {
        self.deps.get(id).unwrap_or(0.0)
    }

    /// Registers this scalar as independent variable `id`, replacing any
    /// previous dependencies with the single seed `(id, 1)`.
    pub fn set_variable_number(&mut self, id: usize) {
        self.deps.clear();
        self.var_id = Some(id);
        self.fixed = false;
        self.deps.insert(id, 1.0);
    }

    /// Turns the scalar into a constant parameter (`true`) or back into a
    /// free temporary (`false`). Fixing clears dependencies; unfixing does
    /// not restore the variable seed, call [`set_variable_number`] for that.
    ///
    /// [`set_variable_number`]: ADScalar::set_variable_number
    pub fn set_fixed(&mut self, fixed: bool) {
        self.fixed = fixed;
        if fixed {
            self.deps.clear();
        }
    }

    /// Assignment from a plain real: sets the value and drops all
    /// dependencies. The fixed flag and variable number are untouched.
    pub fn assign_value(&mut self, value: f64) {
        self.value = value;
        self.deps.clear();
    }

    /// Assignment from another scalar: copies value, fixed flag and
    /// dependencies. The variable number of `self` is kept.
    pub fn assign(&mut self, source: &ADScalar) {
        self.value = source.value;
        self.set_fixed(source.fixed);
        self.deps.clear();
        self.add_dependencies(source);
    }

    /// Multiplies every partial derivative by `c`. Keys are kept even when
    /// `c == 0`.
    pub fn scale_dependencies(&mut self, c: f64) {
        self.deps.scale(c);
    }

    /// Copies every dependency of `other` into `self`; on a shared key the
    /// value from `other` wins.
    pub fn add_dependencies(&mut self, other: &ADScalar) {
        if self.fixed {
            return;
        }
        for (k, d) in &other.deps {
            self.deps.insert(k, d);
        }
    }

    fn into_temp(mut self) -> Self {
        self.var_id = None;
        self.fixed = false;
        self
    }

    // In-place kernels. A fixed target only tracks the value.

    fn add_in(&mut self, rhs: &ADScalar) {
        if !self.fixed {
            self.deps.merge(&rhs.deps, |a, d| a + d);
        }
        self.value += rhs.value;
    }

    fn sub_in(&mut self, rhs: &ADScalar) {
        if !self.fixed {
            self.deps.merge(&rhs.deps, |a, d| a - d);
        }
        self.value -= rhs.value;
    }

    fn mul_in(&mut self, rhs: &ADScalar) {
        if !self.fixed {
            self.scale_dependencies(rhs.value);
            let u = self.value;
            self.deps.merge(&rhs.deps, |a, d| a + d * u);
        }
        self.value *= rhs.value;
    }

    fn div_in(&mut self, rhs: &ADScalar) {
        if !self.fixed {
            let inv = 1.0 / rhs.value;
            let inv_sq = inv * inv;
            let u = self.value;
            self.scale_dependencies(inv);
            self.deps.merge(&rhs.deps, |a, d| a - d * u * inv_sq);
        }
        self.value /= rhs.value;
    }

    fn mul_c(&mut self, c: f64) {
        self.scale_dependencies(c);
        self.value *= c;
    }

    fn div_c(&mut self, c: f64) {
        self.scale_dependencies(1.0 / c);
        self.value /= c;
    }

    /// `c / self`, in place.
    fn rdiv_c(&mut self, c: f64) {
        let inv = 1.0 / self.value;
        self.scale_dependencies(-c * inv * inv);
        self.value = c / self.value;
    }

    /// Checked division: errors when the divisor value is exactly zero.
    pub fn try_div(&self, rhs: &ADScalar) -> Result<ADScalar, AdError> {
        arith(self, BinaryOp::Div, rhs)
    }
}

/// Binary arithmetic operator of the algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Combines two scalars, reporting division by an exactly-zero value as an
/// error instead of producing non-finite derivatives.
///
/// Plain reals take part via [`ADScalar::constant`].
pub fn arith(a: &ADScalar, op: BinaryOp, b: &ADScalar) -> Result<ADScalar, AdError> {
    let mut r = a.clone();
    match op {
        BinaryOp::Add => r.add_in(b),
        BinaryOp::Sub => r.sub_in(b),
        BinaryOp::Mul => r.mul_in(b),
        BinaryOp::Div => {
            if b.value == 0.0 {
                return Err(AdError::DivisionByZero { op: "div" });
            }
            r.div_in(b)
        }
    }
    Ok(r)
}

/// Domain-checked elementary function: `{h(y), {(n, h'(y) d_n y)}}`.
pub fn apply_unary(f: UnaryFn, x: &ADScalar) -> Result<ADScalar, AdError> {
    f.check_domain(x.value)?;
    Ok(Scalar::apply(x, f))
}

impl Scalar for ADScalar {
    fn constant(value: f64) -> Self {
        ADScalar::constant(value)
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn apply(&self, f: UnaryFn) -> Self {
        let mut r = self.clone();
        r.value = f.eval(self.value);
        r.scale_dependencies(f.derivative(self.value));
        r
    }
}

impl fmt::Display for ADScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)?;
        if self.fixed {
            return f.write_str(" (fixed)");
        }
        if let Some(id) = self.var_id {
            return write!(f, " (variable {id})");
        }
        if !self.deps.is_empty() {
            f.write_str(" dependencies: [ ")?;
            for (k, d) in &self.deps {
                write!(f, "({k}, {d}) ")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

// Comparisons look at values only.

impl PartialEq for ADScalar {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialEq<f64> for ADScalar {
    fn eq(&self, other: &f64) -> bool {
        self.value == *other
    }
}

impl PartialEq<ADScalar> for f64 {
    fn eq(&self, other: &ADScalar) -> bool {
        *self == other.value
    }
}

impl PartialOrd for ADScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl PartialOrd<f64> for ADScalar {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.value.partial_cmp(other)
    }
}

impl PartialOrd<ADScalar> for f64 {
    fn partial_cmp(&self, other: &ADScalar) -> Option<Ordering> {
        self.partial_cmp(&other.value)
    }
}

impl Neg for ADScalar {
    type Output = ADScalar;
    fn neg(self) -> ADScalar {
        let mut r = self.into_temp();
        r.mul_c(-1.0);
        r
    }
}

impl Neg for &ADScalar {
    type Output = ADScalar;
    fn neg(self) -> ADScalar {
        -self.clone()
    }
}

macro_rules! scalar_binop {
    ($Op:ident, $op:ident, $OpAssign:ident, $op_assign:ident, $kernel:ident) => {
        impl $Op<&ADScalar> for ADScalar {
            type Output = ADScalar;
            #[inline]
            fn $op(self, rhs: &ADScalar) -> ADScalar {
                let mut r = self.into_temp();
                r.$kernel(rhs);
                r
            }
        }

        impl $Op<&ADScalar> for &ADScalar {
            type Output = ADScalar;
            #[inline]
            fn $op(self, rhs: &ADScalar) -> ADScalar {
                self.clone().$op(rhs)
            }
        }

        impl $Op<ADScalar> for &ADScalar {
            type Output = ADScalar;
            #[inline]
            fn $op(self, rhs: ADScalar) -> ADScalar {
                self.clone().$op(&rhs)
            }
        }

        impl $OpAssign<&ADScalar> for ADScalar {
            #[inline]
            fn $op_assign(&mut self, rhs: &ADScalar) {
                self.$kernel(rhs);
            }
        }

        impl $OpAssign<ADScalar> for ADScalar {
            #[inline]
            fn $op_assign(&mut self, rhs: ADScalar) {
                self.$kernel(&rhs);
            }
        }
    };
}

scalar_binop!(Add, add, AddAssign, add_assign, add_in);
scalar_binop!(Sub, sub, SubAssign, sub_assign, sub_in);
scalar_binop!(Mul, mul, MulAssign, mul_assign, mul_in);
scalar_binop!(Div, div, DivAssign, div_assign, div_in);

// Owned-owned: addition and multiplication are symmetric in their
// dependency updates, so merge the smaller map into the larger one.

impl Add for ADScalar {
    type Output = ADScalar;
    #[inline]
    fn add(self, rhs: ADScalar) -> ADScalar {
        if rhs.deps.len() > self.deps.len() {
            rhs.add(&self)
        } else {
            self.add(&rhs)
        }
    }
}

impl Mul for ADScalar {
    type Output = ADScalar;
    #[inline]
    fn mul(self, rhs: ADScalar) -> ADScalar {
        if rhs.deps.len() > self.deps.len() {
            rhs.mul(&self)
        } else {
            self.mul(&rhs)
        }
    }
}

impl Sub for ADScalar {
    type Output = ADScalar;
    #[inline]
    fn sub(self, rhs: ADScalar) -> ADScalar {
        self.sub(&rhs)
    }
}

impl Div for ADScalar {
    type Output = ADScalar;
    #[inline]
    fn div(self, rhs: ADScalar) -> ADScalar {
        self.div(&rhs)
    }
}

// Scalar-real mixing.

impl Add<f64> for ADScalar {
    type Output = ADScalar;
    fn add(self, c: f64) -> ADScalar {
        let mut r = self.into_temp();
        r.value += c;
        r
    }
}

impl Sub<f64> for ADScalar {
    type Output = ADScalar;
    fn sub(self, c: f64) -> ADScalar {
        let mut r = self.into_temp();
        r.value -= c;
        r
    }
}

impl Mul<f64> for ADScalar {
    type Output = ADScalar;
    fn mul(self, c: f64) -> ADScalar {
        let mut r = self.into_temp();
        r.mul_c(c);
        r
    }
}

impl Div<f64> for ADScalar {
    type Output = ADScalar;
    fn div(self, c: f64) -> ADScalar {
        let mut r = self.into_temp();
        r.div_c(c);
        r
    }
}

impl Add<f64> for &ADScalar {
    type Output = ADScalar;
    fn add(self, c: f64) -> ADScalar {
        self.clone() + c
    }
}

impl Sub<f64> for &ADScalar {
    type Output = ADScalar;
    fn sub(self, c: f64) -> ADScalar {
        self.clone() - c
    }
}

impl Mul<f64> for &ADScalar {
    type Output = ADScalar;
    fn mul(self, c: f64) -> ADScalar {
        self.clone() * c
    }
}

impl Div<f64> for &ADScalar {
    type Output = ADScalar;
    fn div(self, c: f64) -> ADScalar {
        self.clone() / c
    }
}

impl Add<ADScalar> for f64 {
    type Output = ADScalar;
    fn add(self, x: ADScalar) -> ADScalar {
        x + self
    }
}

impl Sub<ADScalar> for f64 {
    type Output = ADScalar;
    fn sub(self, x: ADScalar) -> ADScalar {
        let mut r = -x;
        r.value += self;
        r
    }
}

impl Mul<ADScalar> for f64 {
    type Output = ADScalar;
    fn mul(self, x: ADScalar) -> ADScalar {
        x * self
    }
}

impl Div<ADScalar> for f64 {
    type Output = ADScalar;
    fn div(self, x: ADScalar) -> ADScalar {
        let mut r = x.into_temp();
        r.rdiv_c(self);
        r
    }
}

impl Add<&ADScalar> for f64 {
    type Output = ADScalar;
    fn add(self, x: &ADScalar) -> ADScalar {
        self + x.clone()
    }
}

impl Sub<&ADScalar> for f64 {
    type Output = ADScalar;
    fn sub(self, x: &ADScalar) -> ADScalar {
        self - x.clone()
    }
}

impl Mul<&ADScalar> for f64 {
    type Output = ADScalar;
    fn mul(self, x: &ADScalar) -> ADScalar {
        self * x.clone()
    }
}

impl Div<&ADScalar> for f64 {
    type Output = ADScalar;
    fn div(self, x: &ADScalar) -> ADScalar {
        self / x.clone()
    }
}

impl AddAssign<f64> for ADScalar {
    fn add_assign(&mut self, c: f64) {
        self.value += c;
    }
}

impl SubAssign<f64> for ADScalar {
    fn sub_assign(&mut self, c: f64) {
        self.value -= c;
    }
}

impl MulAssign<f64> for ADScalar {
    fn mul_assign(&mut self, c: f64) {
        self.mul_c(c);
    }
}

impl DivAssign<f64> for ADScalar {
    fn div_assign(&mut self, c: f64) {
        self.div_c(c);
    }
}
