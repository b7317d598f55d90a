//! Dense-gradient forward-mode scalar, the comparison baseline for the
//! sparse [`ADScalar`](super::ADScalar).
//!
//! Every quantity that depends on at least one variable carries a gradient
//! of the full system dimension. Constants carry an empty gradient, which
//! is read as all zeros.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{Scalar, UnaryFn};

#[derive(Debug, Clone, Default)]
pub struct DenseADScalar {
    value: f64,
    grad: Vec<f64>,
}

impl DenseADScalar {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            grad: Vec::new(),
        }
    }

    /// Independent variable `id` of an `n`-dimensional system.
    pub fn variable(value: f64, id: usize, n: usize) -> Self {
        let mut grad = vec![0.0; n];
        grad[id] = 1.0;
        Self { value, grad }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Gradient; empty for constants.
    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn der(&self, id: usize) -> f64 {
        self.grad.get(id).copied().unwrap_or(0.0)
    }

    fn scale(&mut self, c: f64) {
        for g in &mut self.grad {
            *g *= c;
        }
    }

    /// `self.grad = a * self.grad + b * other.grad`
    fn combine(&mut self, a: f64, other: &DenseADScalar, b: f64) {
        if other.grad.is_empty() {
            self.scale(a);
        } else if self.grad.is_empty() {
            self.grad = other.grad.iter().map(|g| b * g).collect();
        } else {
            debug_assert_eq!(self.grad.len(), other.grad.len());
            for (s, o) in self.grad.iter_mut().zip(&other.grad) {
                *s = a * *s + b * o;
            }
        }
    }
}

impl Scalar for DenseADScalar {
    fn constant(value: f64) -> Self {
        DenseADScalar::constant(value)
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn apply(&self, f: UnaryFn) -> Self {
        let mut r = self.clone();
        r.value = f.eval(self.value);
        r.scale(f.derivative(self.value));
        r
    }
}

impl PartialEq for DenseADScalar {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for DenseADScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl Neg for DenseADScalar {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.value = -self.value;
        self.scale(-1.0);
        self
    }
}

impl Add<&DenseADScalar> for DenseADScalar {
    type Output = Self;
    fn add(mut self, rhs: &DenseADScalar) -> Self {
        self.combine(1.0, rhs, 1.0);
        self.value += rhs.value;
        self
    }
}

impl Sub<&DenseADScalar> for DenseADScalar {
    type Output = Self;
    fn sub(mut self, rhs: &DenseADScalar) -> Self {
        self.combine(1.0, rhs, -1.0);
        self.value -= rhs.value;
        self
    }
}

impl Mul<&DenseADScalar> for DenseADScalar {
    type Output = Self;
    fn mul(mut self, rhs: &DenseADScalar) -> Self {
        let u = self.value;
        self.combine(rhs.value, rhs, u);
        self.value *= rhs.value;
        self
    }
}

impl Div<&DenseADScalar> for DenseADScalar {
    type Output = Self;
    fn div(mut self, rhs: &DenseADScalar) -> Self {
        let inv = 1.0 / rhs.value;
        let u = self.value;
        self.combine(inv, rhs, -u * inv * inv);
        self.value /= rhs.value;
        self
    }
}

macro_rules! owned_rhs {
    ($Op:ident, $op:ident) => {
        impl $Op for DenseADScalar {
            type Output = Self;
            fn $op(self, rhs: DenseADScalar) -> Self {
                self.$op(&rhs)
            }
        }
    };
}

owned_rhs!(Add, add);
owned_rhs!(Sub, sub);
owned_rhs!(Mul, mul);
owned_rhs!(Div, div);

impl Add<f64> for DenseADScalar {
    type Output = Self;
    fn add(mut self, c: f64) -> Self {
        self.value += c;
        self
    }
}

impl Sub<f64> for DenseADScalar {
    type Output = Self;
    fn sub(mut self, c: f64) -> Self {
        self.value -= c;
        self
    }
}

impl Mul<f64> for DenseADScalar {
    type Output = Self;
    fn mul(mut self, c: f64) -> Self {
        self.value *= c;
        self.scale(c);
        self
    }
}

impl Div<f64> for DenseADScalar {
    type Output = Self;
    fn div(mut self, c: f64) -> Self {
        self.value /= c;
        self.scale(1.0 / c);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient() {
        let x = DenseADScalar::variable(2.0, 0, 3);
        let y = DenseADScalar::variable(3.0, 1, 3);
        let p = x.clone() * &y;
        assert_eq!(p.value(), 6.0);
        assert_eq!(p.grad(), &[3.0, 2.0, 0.0]);
        let q = p / &y;
        assert_eq!(q.value(), 2.0);
        assert!((q.der(0) - 1.0).abs() < 1e-15);
        assert!(q.der(1).abs() < 1e-15);
    }

    #[test]
    fn constants_stay_empty() {
        let c = DenseADScalar::constant(2.0) * 3.0 + 1.0;
        assert!(c.grad().is_empty());
        assert_eq!(c.value(), 7.0);
        let x = DenseADScalar::variable(1.0, 2, 4);
        let s = DenseADScalar::constant(5.0) - &x;
        assert_eq!(s.grad(), &[0.0, 0.0, -1.0, 0.0]);
        assert_eq!(s.value(), 4.0);
    }

    #[test]
    fn unary_chain() {
        let x = DenseADScalar::variable(0.5, 0, 1);
        let e = Scalar::exp(&(x * 2.0));
        assert!((e.value() - 1f64.exp()).abs() < 1e-15);
        assert!((e.der(0) - 2.0 * 1f64.exp()).abs() < 1e-14);
    }
}
