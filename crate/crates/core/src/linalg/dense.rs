//! Row-major dense matrix and the partial-pivoting Gaussian elimination
//! used as the reference solver in tests.

use std::ops::{Index, IndexMut};

use super::LinalgError;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            n_rows,
            n_cols,
            data,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, other.n_rows);
        let mut out = DenseMatrix::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.n_cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n_cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n_cols + j]
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(LinalgError::NotSquare {
            rows: n,
            cols: a.n_cols(),
        });
    }
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, m[(i, k)].abs()))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if pmax == 0.0 {
            return Err(LinalgError::Singular { step: k });
        }
        if p != k {
            for j in 0..n {
                m.data.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        let pivot = m[(k, k)];
        for i in k + 1..n {
            let l = m[(i, k)] / pivot;
            if l == 0.0 {
                continue;
            }
            m[(i, k)] = 0.0;
            for j in k + 1..n {
                let u = m[(k, j)];
                m[(i, j)] -= l * u;
            }
            x[i] -= l * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[(k, j)] * x[j]).sum();
        x[k] = (x[k] - s) / m[(k, k)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one() {
        let a = DenseMatrix::from_rows(&[[2.0]]);
        assert_eq!(dense_solve(&a, &[4.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn identity_returns_rhs() {
        let b = [1.0, -2.0, 3.5, 0.0];
        assert_eq!(dense_solve(&DenseMatrix::identity(4), &b).unwrap(), b);
    }

    #[test]
    fn hilbert_four() {
        // The exact inverse of H4 is integral with row sums
        // (-4, 60, -180, 140); that vector solves H4 x = (1, 1, 1, 1).
        let h = DenseMatrix::from_rows(&[
            [1.0, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0],
            [1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0, 1.0 / 5.0],
            [1.0 / 3.0, 1.0 / 4.0, 1.0 / 5.0, 1.0 / 6.0],
            [1.0 / 4.0, 1.0 / 5.0, 1.0 / 6.0, 1.0 / 7.0],
        ]);
        let x = dense_solve(&h, &[1.0; 4]).unwrap();
        let expected = [-4.0, 60.0, -180.0, 140.0];
        for (a, e) in x.iter().zip(expected) {
            assert!((a - e).abs() < 1e-9 * e.abs(), "{a} vs {e}");
        }
    }

    #[test]
    fn singular_reported() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(
            dense_solve(&a, &[1.0, 1.0]),
            Err(LinalgError::Singular { step: 1 })
        ));
    }
}
