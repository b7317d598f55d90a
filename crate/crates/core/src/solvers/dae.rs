use std::error::Error;
use std::io::Write;

use log::{debug, info};
use thiserror::Error;

use super::newton::{newton_solve, NewtonConfig, SolverError};
use crate::ad::{ADScalar, Scalar};
use crate::models::{DaeModel, ResidualModel};
use crate::structure::{assemble_csr, CsrMatrix, StructureError};

/// Boxed error returned by step observers.
pub type ObserverError = Box<dyn Error + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DaeConfig {
    /// Step size (s).
    pub h: f64,
    pub t_end: f64,
    pub newton: NewtonConfig,
    /// Store every `record_every`-th state in the trajectory (the initial
    /// and final states are always kept). Zero stores only those two.
    pub record_every: usize,
}

impl DaeConfig {
    pub fn new(h: f64, t_end: f64) -> Self {
        Self {
            h,
            t_end,
            newton: NewtonConfig {
                abs_tol: 1e-8,
                max_iter: 50,
                damping: 1.0,
            },
            record_every: 1,
        }
    }

    /// Implicit Euler coefficient of `vdot` with respect to `v`.
    pub fn alpha(&self) -> f64 {
        1.0 / self.h
    }

    /// Number of steps; a trailing remainder shorter than `h` becomes one
    /// extra, shorter step.
    pub fn n_steps(&self) -> usize {
        let r = self.t_end / self.h;
        let n = r.round();
        if (r - n).abs() <= 1e-9 * r.max(1.0) {
            n as usize
        } else {
            r.ceil() as usize
        }
    }

    pub fn validate(&self) -> Result<(), DaeError> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(DaeError::InvalidConfig(format!("step size must be positive, got {}", self.h)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(DaeError::InvalidConfig(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        self.newton
            .validate()
            .map_err(|e| DaeError::InvalidConfig(e.to_string()))
    }
}

/// Progress report after each accepted step.
#[derive(Debug)]
pub struct StepInfo<'a> {
    pub step: usize,
    pub t: f64,
    pub v: &'a [f64],
    pub newton_iterations: usize,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        Some((*self.times.last()?, self.states.last()?.as_slice()))
    }

    /// CSV with a `t` column followed by the chosen state components.
    /// `columns` pairs a header name with a state index; `None` writes all
    /// components as `v0, v1, ...`.
    pub fn write_csv<W: Write>(&self, w: W, columns: Option<&[(String, usize)]>) -> csv::Result<()> {
        let all: Vec<(String, usize)>;
        let cols = match columns {
            Some(c) => c,
            None => {
                let n = self.states.first().map_or(0, Vec::len);
                all = (0..n).map(|i| (format!("v{i}"), i)).collect();
                &all
            }
        };
        let mut out = csv::Writer::from_writer(w);
        out.write_record(std::iter::once("t").chain(cols.iter().map(|c| c.0.as_str())))?;
        for (t, v) in self.times.iter().zip(&self.states) {
            out.write_record(
                std::iter::once(t.to_string()).chain(cols.iter().map(|&(_, i)| v[i].to_string())),
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Amplitude and frequency of a periodic signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waveform {
    /// Half the peak-to-peak excursion.
    pub amplitude: f64,
    /// From upward zero crossings, linearly interpolated.
    pub frequency: f64,
    pub crossings: usize,
}

impl Trajectory {
    /// Measures `signal(state)` over the recorded samples with `t >= t_from`.
    /// `None` unless at least two upward zero crossings are found.
    pub fn waveform(&self, t_from: f64, signal: impl Fn(&[f64]) -> f64) -> Option<Waveform> {
        let samples: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.states)
            .filter(|(t, _)| **t >= t_from)
            .map(|(&t, v)| (t, signal(v)))
            .collect();
        let (lo, hi) = samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| (lo.min(y), hi.max(y)));
        let ups: Vec<f64> = samples
            .windows(2)
            .filter(|w| w[0].1 < 0.0 && w[1].1 >= 0.0)
            .map(|w| {
                let ((t0, y0), (t1, y1)) = (w[0], w[1]);
                t0 + (t1 - t0) * (-y0) / (y1 - y0)
            })
            .collect();
        if ups.len() < 2 {
            return None;
        }
        Some(Waveform {
            amplitude: 0.5 * (hi - lo),
            frequency: (ups.len() - 1) as f64 / (ups[ups.len() - 1] - ups[0]),
            crossings: ups.len(),
        })
    }
}

#[derive(Debug, Error)]
pub enum DaeError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("state has length {found}, model dimension is {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Newton failed at step {step} (t = {t})")]
    Newton {
        step: usize,
        t: f64,
        #[source]
        source: SolverError,
    },
    #[error("initialization failed; try a different initial guess")]
    Init(#[source] SolverError),
    #[error("observer aborted at step {step}")]
    Observer {
        step: usize,
        #[source]
        source: ObserverError,
    },
}

/// The algebraic system of one implicit Euler step:
/// `G(v) = F((v - v_prev) * alpha, v, t)`.
///
/// Evaluated with AD variables, each `vdot_i` inherits the dependency
/// `{(i, alpha)}` and each `v_i` the dependency `{(i, 1)}`, so the
/// assembled Jacobian is `alpha dF/dvdot + dF/dv`.
pub struct ImplicitEulerStep<'a, M: ?Sized> {
    pub model: &'a M,
    pub v_prev: &'a [f64],
    pub t: f64,
    pub alpha: f64,
}

impl<M: DaeModel + ?Sized> ResidualModel for ImplicitEulerStep<'_, M> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn residual<S: Scalar>(&self, x: &[S], f: &mut [S]) {
        let vdot: Vec<S> = x
            .iter()
            .zip(self.v_prev)
            .map(|(xi, &p)| (xi.clone() - p) * self.alpha)
            .collect();
        self.model.residual(&vdot, x, self.t, f);
    }

    fn step_fraction(&self, x: &[f64], dx: &[f64]) -> f64 {
        self.model.step_fraction(x, dx)
    }
}

/// Combined Jacobian `alpha dF/dvdot + dF/dv` at a given `(vdot, v, t)`
/// by explicit seeding: `vdot_i` carries `{(i, alpha)}`, `v_i` carries
/// `{(i, 1)}`. The residual values ride along as the right-hand side.
pub fn dae_jacobian<M: DaeModel + ?Sized>(
    model: &M,
    vdot: &[f64],
    v: &[f64],
    t: f64,
    alpha: f64,
) -> Result<CsrMatrix, StructureError> {
    let n = model.dim();
    let vd: Vec<ADScalar> = vdot
        .iter()
        .enumerate()
        .map(|(i, &x)| ADScalar::seeded(x, i, alpha))
        .collect();
    let va: Vec<ADScalar> = v
        .iter()
        .enumerate()
        .map(|(i, &x)| ADScalar::variable(x, i))
        .collect();
    let mut f = vec![ADScalar::default(); n];
    model.residual(&vd, &va, t, &mut f);
    assemble_csr(&f, n)
}

/// Algebraic state at `t = 0` with all derivatives set to zero, found by
/// damped Newton (damping 0.5, up to 200 iterations) from `guess`.
pub fn consistent_init<M: DaeModel + ?Sized>(model: &M, guess: &[f64]) -> Result<Vec<f64>, DaeError> {
    struct Frozen<'a, M: ?Sized>(&'a M);

    impl<M: DaeModel + ?Sized> ResidualModel for Frozen<'_, M> {
        fn dim(&self) -> usize {
            self.0.dim()
        }

        fn residual<S: Scalar>(&self, x: &[S], f: &mut [S]) {
            let zero = vec![S::constant(0.0); x.len()];
            self.0.residual(&zero, x, 0.0, f);
        }

        fn step_fraction(&self, x: &[f64], dx: &[f64]) -> f64 {
            self.0.step_fraction(x, dx)
        }
    }

    let cfg = NewtonConfig {
        abs_tol: 1e-9,
        max_iter: 200,
        damping: 0.5,
    };
    match newton_solve(&Frozen(model), guess, &cfg) {
        Ok((v, stats)) => {
            info!("consistent initial state after {} iterations", stats.iterations);
            Ok(v)
        }
        Err(SolverError::DimensionMismatch { expected, found }) => {
            Err(DaeError::DimensionMismatch { expected, found })
        }
        Err(e) => Err(DaeError::Init(e)),
    }
}

/// Integrates `F(vdot, v, t) = 0` from `v0` at `t = 0` with fixed-step
/// implicit Euler.
pub fn dae_integrate<M, O>(model: &M, v0: &[f64], cfg: &DaeConfig, mut observer: O) -> Result<Trajectory, DaeError>
where
    M: DaeModel + ?Sized,
    O: FnMut(&StepInfo<'_>) -> Result<(), ObserverError>,
{
    cfg.validate()?;
    if v0.len() != model.dim() {
        return Err(DaeError::DimensionMismatch {
            expected: model.dim(),
            found: v0.len(),
        });
    }
    let n_steps = cfg.n_steps();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![v0.to_vec()],
    };
    let mut v = v0.to_vec();
    let mut t = 0.0;
    for step in 1..=n_steps {
        let t_next = if step == n_steps { cfg.t_end } else { step as f64 * cfg.h };
        let sys = ImplicitEulerStep {
            model,
            v_prev: &v,
            t: t_next,
            alpha: 1.0 / (t_next - t),
        };
        let (v_next, stats) = newton_solve(&sys, &v, &cfg.newton).map_err(|source| DaeError::Newton {
            step,
            t: t_next,
            source,
        })?;
        debug!("step {step}: t = {t_next}, {} Newton iterations", stats.iterations);
        v = v_next;
        t = t_next;
        observer(&StepInfo {
            step,
            t,
            v: &v,
            newton_iterations: stats.iterations,
            residual_norm: stats.residual_norm,
        })
        .map_err(|source| DaeError::Observer { step, source })?;
        if step == n_steps || (cfg.record_every > 0 && step % cfg.record_every == 0) {
            traj.times.push(t);
            traj.states.push(v.clone());
        }
    }
    Ok(traj)
}
