//! Newton's method on sparse AD Jacobians, a finite-difference Jacobian
//! oracle and a fixed-step implicit Euler DAE integrator.

mod dae;
mod fd;
mod newton;

pub use dae::{
    consistent_init, dae_integrate, dae_jacobian, DaeConfig, DaeError, ImplicitEulerStep, ObserverError,
    StepInfo, Trajectory, Waveform,
};
pub use fd::{fd_jacobian, fd_jacobian_with, relative_error_inf, FdScheme};
pub use newton::{newton_solve, newton_solve_with, NewtonConfig, NewtonIterate, NewtonStats, SolverError};

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    // NaN must not be swallowed by max
    v.iter().fold(0.0_f64, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x.abs()) })
}
