use crate::linalg::DenseMatrix;
use crate::models::{evaluate, ResidualModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FdScheme {
    /// `(f(x + e_j h) - f(x)) / h`
    #[default]
    Forward,
    /// `(f(x + e_j h) - f(x - e_j h)) / 2h`
    Central,
}

/// Forward-difference Jacobian with per-column step
/// `eps_scale * max(1, |x_j|)`.
pub fn fd_jacobian<M: ResidualModel + ?Sized>(model: &M, x: &[f64], eps_scale: f64) -> DenseMatrix {
    fd_jacobian_with(model, x, eps_scale, FdScheme::Forward)
}

pub fn fd_jacobian_with<M: ResidualModel + ?Sized>(
    model: &M,
    x: &[f64],
    eps_scale: f64,
    scheme: FdScheme,
) -> DenseMatrix {
    assert!(eps_scale > 0.0, "eps_scale must be positive");
    let n = model.dim();
    assert_eq!(x.len(), n, "state length");
    let f0 = evaluate::<f64, M>(model, x);
    let mut jac = DenseMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = eps_scale * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        // use the step actually representable in floating point
        let h_fwd = xp[j] - x[j];
        let fp = evaluate::<f64, M>(model, &xp);
        match scheme {
            FdScheme::Forward => {
                for i in 0..n {
                    jac[(i, j)] = (fp[i] - f0[i]) / h_fwd;
                }
            }
            FdScheme::Central => {
                xp[j] = x[j] - h;
                let h_tot = x[j] + h_fwd - xp[j];
                let fm = evaluate::<f64, M>(model, &xp);
                for i in 0..n {
                    jac[(i, j)] = (fp[i] - fm[i]) / h_tot;
                }
            }
        }
        xp[j] = x[j];
    }
    jac
}

/// `||a - b||_inf / ||b||_inf`, falling back to the absolute error when
/// `b` vanishes.
pub fn relative_error_inf(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let diff = a.sub(b).norm_inf();
    let scale = b.norm_inf();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::Scalar;
    use crate::models::{residual_and_jacobian, LorenzSteadyState};

    struct Linear(DenseMatrix);

    impl ResidualModel for Linear {
        fn dim(&self) -> usize {
            self.0.n_rows()
        }

        fn residual<S: Scalar>(&self, x: &[S], f: &mut [S]) {
            for (i, fi) in f.iter_mut().enumerate() {
                let mut acc = S::constant(0.0);
                for (j, xj) in x.iter().enumerate() {
                    acc = acc + xj.clone() * self.0[(i, j)];
                }
                *fi = acc;
            }
        }
    }

    #[test]
    fn linear_model_recovers_matrix() {
        let a = DenseMatrix::from_rows(&[[3.0, -1.0, 0.5], [0.0, 2.0, 7.0], [-4.0, 0.25, 1.0]]);
        let m = Linear(a.clone());
        for scheme in [FdScheme::Forward, FdScheme::Central] {
            let j = fd_jacobian_with(&m, &[0.3, -2.0, 11.0], f64::EPSILON.sqrt(), scheme);
            assert!(j.sub(&a).max_abs() <= 1e-9 * a.norm_inf());
        }
    }

    #[test]
    fn lorenz_fd_matches_ad() {
        let m = LorenzSteadyState::default();
        let x = [8.0, 20.0, 2.0 / 3.0];
        let ad = residual_and_jacobian(&m, &x).unwrap().to_dense();
        let fd = fd_jacobian(&m, &x, f64::EPSILON.sqrt());
        assert!(relative_error_inf(&fd, &ad) <= 1e-5);
    }

    #[test]
    fn relative_error_of_zero_reference() {
        let z = DenseMatrix::zeros(2, 2);
        assert_eq!(relative_error_inf(&DenseMatrix::identity(2), &z), 1.0);
        assert_eq!(relative_error_inf(&z, &z), 0.0);
    }
}
