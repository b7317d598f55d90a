//! Residual models written once, generic over [`Scalar`].

mod config;
mod decay;
mod lorenz;
mod microgrid;

pub use config::{parse_overrides, ConfigError};
pub use decay::Decay;
pub use lorenz::{
    lorenz_ad, lorenz_golden, lorenz_residual, LorenzParams, LorenzRoles, LorenzSteadyState, GOLDEN_PARAMS,
    GOLDEN_STATE,
};
pub use microgrid::{
    diode_current, microgrid_residual, modulation, Global, LoadBlock, Microgrid, MicrogridLayout,
    MicrogridParams, Phase,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ad::{ADScalar, Scalar};
use crate::structure::{assemble_csr, CsrMatrix, StructureError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown model `{0}` (expected lorenz, microgrid or decay)")]
    UnknownModel(String),
    #[error("{what}: expected length {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), ModelError> {
    if expected == found {
        Ok(())
    } else {
        Err(ModelError::Dimension {
            what,
            expected,
            found,
        })
    }
}

/// Algebraic system `f(x) = 0`.
pub trait ResidualModel {
    fn dim(&self) -> usize;

    /// Fills `f` (length [`dim`](Self::dim)) with the residuals at `x`.
    /// Callers guarantee both slices have length `dim`.
    fn residual<S: Scalar>(&self, x: &[S], f: &mut [S]);

    /// Largest admissible fraction of the Newton update `dx` taken from
    /// `x`. Models with exponential nonlinearities use it to bound
    /// per-iteration changes; the default accepts the full step.
    fn step_fraction(&self, _x: &[f64], _dx: &[f64]) -> f64 {
        1.0
    }
}

/// Implicit DAE `F(vdot, v, t) = 0`.
pub trait DaeModel {
    fn dim(&self) -> usize;

    fn residual<S: Scalar>(&self, vdot: &[S], v: &[S], t: f64, f: &mut [S]);

    /// See [`ResidualModel::step_fraction`].
    fn step_fraction(&self, _v: &[f64], _dv: &[f64]) -> f64 {
        1.0
    }
}

/// Evaluates a model with any scalar type.
pub fn evaluate<S: Scalar, M: ResidualModel + ?Sized>(model: &M, x: &[S]) -> Vec<S> {
    let mut f = vec![S::constant(0.0); model.dim()];
    model.residual(x, &mut f);
    f
}

/// Registers `x[i]` as independent variable `i`.
pub fn ad_variables(x: &[f64]) -> Vec<ADScalar> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| ADScalar::variable(v, i))
        .collect()
}

/// One AD pass: residual values (as the CSR right-hand side) and the
/// sparse Jacobian at `x`.
pub fn residual_and_jacobian<M: ResidualModel + ?Sized>(
    model: &M,
    x: &[f64],
) -> Result<CsrMatrix, StructureError> {
    let f = evaluate(model, &ad_variables(x));
    assemble_csr(&f, model.dim())
}

/// Built-in models selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Lorenz,
    Microgrid,
    Decay,
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lorenz" => Ok(ModelKind::Lorenz),
            "microgrid" => Ok(ModelKind::Microgrid),
            "decay" => Ok(ModelKind::Decay),
            _ => Err(ModelError::UnknownModel(s.to_string())),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Lorenz => "lorenz",
            ModelKind::Microgrid => "microgrid",
            ModelKind::Decay => "decay",
        })
    }
}
