use log::debug;
use thiserror::Error;

use super::norm_inf;
use crate::linalg::{lu_factor, lu_solve, LinalgError};
use crate::models::{residual_and_jacobian, ResidualModel};
use crate::structure::{CsrMatrix, StructureError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Convergence threshold on the residual infinity norm.
    pub abs_tol: f64,
    pub max_iter: usize,
    /// Fixed scale in (0, 1] applied to every update.
    pub damping: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_iter: 50,
            damping: 1.0,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.abs_tol > 0.0) {
            return Err(SolverError::InvalidConfig(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if self.max_iter == 0 {
            return Err(SolverError::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(SolverError::InvalidConfig(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonStats {
    /// Number of updates applied.
    pub iterations: usize,
    pub residual_norm: f64,
    /// Model evaluations (each gives residual and Jacobian together).
    pub evaluations: usize,
}

/// State handed to the observer after each evaluation.
#[derive(Debug)]
pub struct NewtonIterate<'a> {
    pub iteration: usize,
    pub x: &'a [f64],
    /// Jacobian at `x`, with the residual as its right-hand side.
    pub jacobian: &'a CsrMatrix,
    pub residual_norm: f64,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("no convergence after {iterations} iterations (residual norm {residual_norm:e})")]
    NonConvergence {
        x: Vec<f64>,
        residual_norm: f64,
        iterations: usize,
    },
    #[error("singular Jacobian at iteration {iteration}")]
    Singular {
        iteration: usize,
        #[source]
        source: LinalgError,
    },
    #[error("non-finite residual at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("initial guess has length {found}, model dimension is {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Solves `f(x) = 0` from `x0`.
pub fn newton_solve<M: ResidualModel + ?Sized>(
    model: &M,
    x0: &[f64],
    cfg: &NewtonConfig,
) -> Result<(Vec<f64>, NewtonStats), SolverError> {
    newton_solve_with(model, x0, cfg, |_| {})
}

/// [`newton_solve`] with a callback invoked after every evaluation.
pub fn newton_solve_with<M, F>(
    model: &M,
    x0: &[f64],
    cfg: &NewtonConfig,
    mut observe: F,
) -> Result<(Vec<f64>, NewtonStats), SolverError>
where
    M: ResidualModel + ?Sized,
    F: FnMut(&NewtonIterate<'_>),
{
    cfg.validate()?;
    if x0.len() != model.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: model.dim(),
            found: x0.len(),
        });
    }
    let mut x = x0.to_vec();
    let mut iteration = 0;
    loop {
        let jac = residual_and_jacobian(model, &x)?;
        let f = jac.rhs().expect("assembled with residual");
        let norm = norm_inf(f);
        observe(&NewtonIterate {
            iteration,
            x: &x,
            jacobian: &jac,
            residual_norm: norm,
        });
        debug!("newton iteration {iteration}: |f| = {norm:e}");
        if !norm.is_finite() {
            return Err(SolverError::NonFinite { iteration });
        }
        if norm <= cfg.abs_tol {
            return Ok((
                x,
                NewtonStats {
                    iterations: iteration,
                    residual_norm: norm,
                    evaluations: iteration + 1,
                },
            ));
        }
        if iteration == cfg.max_iter {
            return Err(SolverError::NonConvergence {
                x,
                residual_norm: norm,
                iterations: iteration,
            });
        }

        let lu = lu_factor(&jac).map_err(|source| SolverError::Singular { iteration, source })?;
        let mut dx = lu_solve(&lu, f).map_err(|source| SolverError::Singular { iteration, source })?;
        for d in &mut dx {
            *d = -*d;
        }
        let scale = cfg.damping * model.step_fraction(&x, &dx).clamp(0.0, 1.0);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += scale * di;
        }
        iteration += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::Scalar;
    use crate::models::LorenzSteadyState;
    use crate::structure::SparsityPattern;
    use std::cell::Cell;

    struct Quadratic;

    impl ResidualModel for Quadratic {
        fn dim(&self) -> usize {
            1
        }

        fn residual<S: Scalar>(&self, x: &[S], f: &mut [S]) {
            f[0] = x[0].clone() * &x[0] - 4.0;
        }
    }

    struct Counted<'a, M> {
        inner: M,
        calls: &'a Cell<usize>,
    }

    impl<M: ResidualModel> ResidualModel for Counted<'_, M> {
        fn dim(&self) -> usize {
            self.inner.dim()
        }

        fn residual<S: Scalar>(&self, x: &[S], f: &mut [S]) {
            self.calls.set(self.calls.get() + 1);
            self.inner.residual(x, f)
        }
    }

    #[test]
    fn square_root_of_four() {
        let cfg = NewtonConfig {
            abs_tol: 1e-13,
            ..Default::default()
        };
        let (x, stats) = newton_solve(&Quadratic, &[3.0], &cfg).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
        assert!(stats.iterations <= 7, "{stats:?}");
    }

    #[test]
    fn lorenz_nontrivial_fixed_point() {
        let m = LorenzSteadyState::default();
        let calls = Cell::new(0);
        let counted = Counted { inner: m, calls: &calls };
        let mut patterns: Vec<SparsityPattern> = Vec::new();
        let (x, stats) = newton_solve_with(&counted, &[5.0, 5.0, 20.0], &NewtonConfig::default(), |it| {
            patterns.push(it.jacobian.pattern())
        })
        .unwrap();
        let r = 72f64.sqrt();
        assert!((x[0] - r).abs() < 1e-8 && (x[1] - r).abs() < 1e-8 && (x[2] - 27.0).abs() < 1e-8);
        assert_eq!(calls.get(), stats.evaluations);
        assert_eq!(stats.evaluations, stats.iterations + 1);
        assert!(patterns.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn lorenz_origin() {
        let m = LorenzSteadyState::default();
        let (x, _) = newton_solve(&m, &[0.1, 0.1, 0.1], &NewtonConfig::default()).unwrap();
        assert!(x.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn already_converged_is_a_no_op() {
        let (x, stats) = newton_solve(&Quadratic, &[2.0], &NewtonConfig::default()).unwrap();
        assert_eq!(x, vec![2.0]);
        assert_eq!(stats.iterations, 0);
        assert_eq!(stats.evaluations, 1);
    }

    #[test]
    fn failures() {
        let cfg = NewtonConfig {
            max_iter: 2,
            ..Default::default()
        };
        match newton_solve(&Quadratic, &[1000.0], &cfg) {
            Err(SolverError::NonConvergence { x, iterations, residual_norm }) => {
                assert_eq!(iterations, 2);
                assert_eq!(x.len(), 1);
                assert!(residual_norm > 1.0);
            }
            other => panic!("{other:?}"),
        }
        // f'(0) = 0
        assert!(matches!(
            newton_solve(&Quadratic, &[0.0], &NewtonConfig::default()),
            Err(SolverError::Singular { iteration: 0, .. })
        ));
        assert!(matches!(
            newton_solve(&Quadratic, &[1.0, 2.0], &NewtonConfig::default()),
            Err(SolverError::DimensionMismatch { expected: 1, found: 2 })
        ));
        for bad in [
            NewtonConfig { abs_tol: 0.0, ..Default::default() },
            NewtonConfig { max_iter: 0, ..Default::default() },
            NewtonConfig { damping: 1.5, ..Default::default() },
        ] {
            assert!(matches!(newton_solve(&Quadratic, &[3.0], &bad), Err(SolverError::InvalidConfig(_))));
        }
    }

    #[test]
    fn damping_slows_convergence() {
        let full = newton_solve(&Quadratic, &[3.0], &NewtonConfig::default()).unwrap().1;
        let half = NewtonConfig {
            damping: 0.5,
            ..Default::default()
        };
        let damped = newton_solve(&Quadratic, &[3.0], &half).unwrap().1;
        assert!(damped.iterations > full.iterations);
    }
}
