//! Right-looking sparse LU with row partial pivoting.
//!
//! Rows are held as sorted sparse vectors during elimination; fill-in is
//! merged into the target rows. A per-column row list (grown on fill) finds
//! the pivot candidates of each step.

use super::{DenseMatrix, LinalgError};
use crate::structure::CsrMatrix;

/// Pivots smaller than this fraction of the pivot row's largest entry are
/// treated as zero.
const PIVOT_REL_TOL: f64 = 1e-14;

type SparseRow = Vec<(usize, f64)>;

/// `P A = L U`, with `L` unit lower triangular.
///
/// Row `k` of the combined storage belongs to elimination step `k`:
/// entries with column `< k` are multipliers of `L`, the rest is row `k`
/// of `U` starting with the diagonal.
#[derive(Debug, Clone)]
pub struct LuFactors {
    rows: Vec<SparseRow>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// `perm[k]` is the original row eliminated at step `k`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Stored entries of `L` (excluding the unit diagonal) and `U`.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn l_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut l = DenseMatrix::identity(n);
        for (k, row) in self.rows.iter().enumerate() {
            for &(j, v) in row.iter().take_while(|e| e.0 < k) {
                l[(k, j)] = v;
            }
        }
        l
    }

    pub fn u_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut u = DenseMatrix::zeros(n, n);
        for (k, row) in self.rows.iter().enumerate() {
            for &(j, v) in row.iter().skip_while(|e| e.0 < k) {
                u[(k, j)] = v;
            }
        }
        u
    }
}

/// `r - l * p`, both sorted by column. Columns new to `r` are reported
/// through `on_fill`.
fn axpy_merge(r: &[(usize, f64)], l: f64, p: &[(usize, f64)], mut on_fill: impl FnMut(usize)) -> SparseRow {
    let mut out = Vec::with_capacity(r.len() + p.len());
    let (mut a, mut b) = (0, 0);
    while a < r.len() || b < p.len() {
        match (r.get(a), p.get(b)) {
            (Some(&(ja, va)), Some(&(jb, vb))) if ja == jb => {
                out.push((ja, va - l * vb));
                a += 1;
                b += 1;
            }
            (Some(&(ja, va)), Some(&(jb, _))) if ja < jb => {
                out.push((ja, va));
                a += 1;
            }
            (Some(&(ja, va)), None) => {
                out.push((ja, va));
                a += 1;
            }
            (_, Some(&(jb, vb))) => {
                on_fill(jb);
                out.push((jb, -l * vb));
                b += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

pub fn lu_factor(a: &CsrMatrix) -> Result<LuFactors, LinalgError> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(LinalgError::NotSquare {
            rows: n,
            cols: a.n_cols(),
        });
    }

    let mut work: Vec<SparseRow> = (0..n)
        .map(|i| {
            let (cols, vals) = a.row(i);
            cols.iter().copied().zip(vals.iter().copied()).collect()
        })
        .collect();
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, r) in work.iter().enumerate() {
        for &(j, _) in r {
            col_rows[j].push(i);
        }
    }
    let mut lower: Vec<SparseRow> = vec![Vec::new(); n];
    let mut done = vec![false; n];
    let mut perm = Vec::with_capacity(n);

    for k in 0..n {
        // Every uneliminated row has no entries left of column k, so it
        // holds column k iff its leading entry is there.
        let candidates: Vec<usize> = col_rows[k]
            .iter()
            .copied()
            .filter(|&r| !done[r] && work[r].first().is_some_and(|e| e.0 == k))
            .collect();
        let mut pivot_row = None;
        let mut best = 0.0;
        for &r in &candidates {
            let v = work[r][0].1.abs();
            if v > best {
                best = v;
                pivot_row = Some(r);
            }
        }
        let p = pivot_row.ok_or(LinalgError::Singular { step: k })?;
        let row_max = work[p].iter().fold(0.0_f64, |m, e| m.max(e.1.abs()));
        if best <= PIVOT_REL_TOL * row_max {
            return Err(LinalgError::Singular { step: k });
        }
        done[p] = true;
        perm.push(p);

        let pivot = work[p][0].1;
        let pivot_rest = std::mem::take(&mut work[p]);
        for &r in candidates.iter().filter(|&&r| r != p) {
            let l = work[r][0].1 / pivot;
            let merged = axpy_merge(&work[r][1..], l, &pivot_rest[1..], |j| col_rows[j].push(r));
            work[r] = merged;
            lower[r].push((k, l));
        }
        work[p] = pivot_rest;
    }

    let rows = perm
        .iter()
        .map(|&p| {
            let mut row = std::mem::take(&mut lower[p]);
            row.extend(work[p].iter().copied());
            row
        })
        .collect();
    Ok(LuFactors { rows, perm })
}

/// Solves `A x = b` from the factors of `A`.
pub fn lu_solve(f: &LuFactors, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = f.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let mut y: Vec<f64> = f.perm.iter().map(|&p| b[p]).collect();
    for k in 0..n {
        let s: f64 = f.rows[k]
            .iter()
            .take_while(|e| e.0 < k)
            .map(|&(j, l)| l * y[j])
            .sum();
        y[k] -= s;
    }
    for k in (0..n).rev() {
        let mut u = f.rows[k].iter().skip_while(|e| e.0 < k);
        let &(_, diag) = u.next().expect("diagonal present after factorization");
        let s: f64 = u.map(|&(j, v)| v * y[j]).sum();
        y[k] = (y[k] - s) / diag;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csr(rows: &[&[f64]]) -> CsrMatrix {
        CsrMatrix::from_dense(&DenseMatrix::from_rows(rows))
    }

    #[test]
    fn identity() {
        let f = lu_factor(&CsrMatrix::from_dense(&DenseMatrix::identity(5))).unwrap();
        assert_eq!(f.perm(), &[0, 1, 2, 3, 4]);
        assert_eq!(f.l_dense(), DenseMatrix::identity(5));
        assert_eq!(f.u_dense(), DenseMatrix::identity(5));
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(lu_solve(&f, &b).unwrap(), b);
    }

    #[test]
    fn permutation_matrix() {
        let f = lu_factor(&csr(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(f.perm(), &[1, 0]);
        assert_eq!(lu_solve(&f, &[1.0, 2.0]).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn lorenz_jacobian_solve() {
        let j = csr(&[&[-10.0, 10.0, 0.0], &[2.0, -1.0, -8.0], &[20.0, 8.0, -28.0]]);
        let b = j.mul_vec(&[1.0, 1.0, 1.0]);
        assert_eq!(b, vec![0.0, -7.0, 0.0]);
        let x = lu_solve(&lu_factor(&j).unwrap(), &b).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrices() {
        assert_eq!(
            lu_factor(&csr(&[&[1.0, 2.0], &[2.0, 4.0]])).unwrap_err(),
            LinalgError::Singular { step: 1 }
        );
        // empty column
        assert_eq!(
            lu_factor(&csr(&[&[1.0, 0.0], &[3.0, 0.0]])).unwrap_err(),
            LinalgError::Singular { step: 1 }
        );
        assert!(matches!(
            lu_factor(&CsrMatrix::from_triplets(2, 3, &[]).unwrap()),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let f = lu_factor(&CsrMatrix::from_dense(&DenseMatrix::identity(2))).unwrap();
        assert_eq!(
            lu_solve(&f, &[1.0]).unwrap_err(),
            LinalgError::DimensionMismatch { expected: 2, found: 1 }
        );
    }

    #[test]
    fn fill_in_is_created() {
        // Arrow matrix with the dense row first: eliminating column 0 fills
        // the whole trailing block.
        let a = csr(&[
            &[4.0, 1.0, 1.0, 1.0],
            &[1.0, 4.0, 0.0, 0.0],
            &[1.0, 0.0, 4.0, 0.0],
            &[1.0, 0.0, 0.0, 4.0],
        ]);
        let f = lu_factor(&a).unwrap();
        assert!(f.nnz() > a.nnz());
        let pa = {
            let d = a.to_dense();
            DenseMatrix::from_rows(&f.perm().iter().map(|&p| d.row(p).to_vec()).collect::<Vec<_>>())
        };
        let lu = f.l_dense().matmul(&f.u_dense());
        assert!(pa.sub(&lu).max_abs() < 1e-14);
    }
}
