//! Steady state of the Lorenz system.

use super::ResidualModel;
use crate::ad::{ADScalar, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for LorenzParams {
    /// The classic chaotic regime `sigma = 10, rho = 28, beta = 8/3`.
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
        }
    }
}

impl LorenzParams {
    pub fn as_array(&self) -> [f64; 3] {
        [self.sigma, self.rho, self.beta]
    }
}

/// `f = (sigma (y - x), x (rho - z) - y, x y - beta z)` with
/// `x = (x, y, z)` and `p = (sigma, rho, beta)`.
///
/// Nothing here decides which inputs are unknowns; that is up to the
/// caller's choice of scalars.
pub fn lorenz_residual<S: Scalar>(f: &mut [S], x: &[S], p: &[S]) {
    assert!(f.len() == 3 && x.len() == 3 && p.len() == 3, "lorenz works on 3-vectors");
    let xy = x[0].clone() * &x[1];

    f[0] = p[0].clone() * &(x[1].clone() - &x[0]);
    f[1] = x[0].clone() * &(p[1].clone() - &x[2]) - &x[1];
    f[2] = xy - &(p[2].clone() * &x[2]);
}

/// `f(x; p) = 0` with fixed parameters and the state as unknowns.
#[derive(Debug, Clone, Copy, Default)]
pub struct LorenzSteadyState {
    pub params: LorenzParams,
}

impl ResidualModel for LorenzSteadyState {
    fn dim(&self) -> usize {
        3
    }

    fn residual<S: Scalar>(&self, x: &[S], f: &mut [S]) {
        let p: Vec<S> = self.params.as_array().iter().map(|&v| S::constant(v)).collect();
        lorenz_residual(f, x, &p);
    }
}

/// Which of the two input vectors is registered as the unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LorenzRoles {
    /// `x, y, z` are variables 0..3; `sigma, rho, beta` are fixed.
    State,
    /// `sigma, rho, beta` are variables 0..3; `x, y, z` are fixed.
    Parameters,
}

/// The evaluation point of the worked example: `x = (8, 20, 2/3)`,
/// `p = (10, 8/3, 28)`.
pub const GOLDEN_STATE: [f64; 3] = [8.0, 20.0, 2.0 / 3.0];
pub const GOLDEN_PARAMS: [f64; 3] = [10.0, 8.0 / 3.0, 28.0];

/// Evaluates the Lorenz residual with AD scalars, with the unknowns chosen
/// at runtime by `roles`. The other vector is marked fixed.
pub fn lorenz_ad(roles: LorenzRoles, xv: [f64; 3], pv: [f64; 3]) -> Vec<ADScalar> {
    let mut x: Vec<ADScalar> = vec![ADScalar::default(); 3];
    let mut p: Vec<ADScalar> = vec![ADScalar::default(); 3];
    for i in 0..3 {
        match roles {
            LorenzRoles::State => {
                x[i].set_variable_number(i);
                p[i].set_fixed(true);
            }
            LorenzRoles::Parameters => {
                x[i].set_fixed(true);
                p[i].set_variable_number(i);
            }
        }
        x[i].set_value(xv[i]);
        p[i].set_value(pv[i]);
    }
    let mut f = vec![ADScalar::default(); 3];
    lorenz_residual(&mut f, &x, &p);
    f
}

/// [`lorenz_ad`] at [`GOLDEN_STATE`] and [`GOLDEN_PARAMS`].
pub fn lorenz_golden(roles: LorenzRoles) -> Vec<ADScalar> {
    lorenz_ad(roles, GOLDEN_STATE, GOLDEN_PARAMS)
}
