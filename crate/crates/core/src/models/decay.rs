use super::DaeModel;
use crate::ad::Scalar;

/// Linear test problem `vdot + rate * v = 0` in each component.
#[derive(Debug, Clone, Copy)]
pub struct Decay {
    pub dim: usize,
    pub rate: f64,
}

impl Default for Decay {
    fn default() -> Self {
        Self { dim: 1, rate: 1.0 }
    }
}

impl Decay {
    /// `v(t)` for initial value `v0`.
    pub fn exact(&self, v0: f64, t: f64) -> f64 {
        v0 * (-self.rate * t).exp()
    }
}

impl DaeModel for Decay {
    fn dim(&self) -> usize {
        self.dim
    }

    fn residual<S: Scalar>(&self, vdot: &[S], v: &[S], _t: f64, f: &mut [S]) {
        for ((fi, vd), vi) in f.iter_mut().zip(vdot).zip(v) {
            *fi = vd.clone() + &(vi.clone() * self.rate);
        }
    }
}
