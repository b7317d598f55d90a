//! Sparsity patterns, bipartite dependency graphs and CSR assembly of
//! residual vectors, with Matlab and MatrixMarket text export.
//!
//! A residual vector evaluated with [`ADScalar`] already is a compressed
//! sparse row Jacobian: row `i` holds the dependency map of residual `i`,
//! and the residual value rides along as the row's right-hand side.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::ad::{ADScalar, DenseADScalar};
use crate::linalg::DenseMatrix;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("row {row}: dependency on variable {key} but only {n_cols} columns")]
    ColumnOutOfRange { row: usize, key: usize, n_cols: usize },
    #[error("matrix market: {0}")]
    MatrixMarket(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Per-row sorted column indices of structurally nonzero Jacobian entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<Vec<usize>>,
}

impl SparsityPattern {
    /// Builds a pattern from explicit rows, sorting and deduplicating each.
    pub fn from_rows(n_cols: usize, mut rows: Vec<Vec<usize>>) -> Result<Self, StructureError> {
        for (i, r) in rows.iter_mut().enumerate() {
            r.sort_unstable();
            r.dedup();
            if let Some(&key) = r.last().filter(|&&k| k >= n_cols) {
                return Err(StructureError::ColumnOutOfRange {
                    row: i,
                    key,
                    n_cols,
                });
            }
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols,
            rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Fraction of structurally nonzero entries, `nnz / (rows * cols)`.
    pub fn density(&self) -> f64 {
        if self.n_rows == 0 || self.n_cols == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.n_rows as f64 * self.n_cols as f64)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&j).is_ok()
    }

    /// 0/1 incidence matrix.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, r) in self.rows.iter().enumerate() {
            for &j in r {
                m[(i, j)] = 1.0;
            }
        }
        m
    }
}

/// Compressed sparse row matrix with an optional companion right-hand side
/// (the residual values when assembled from a residual vector).
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
    rhs: Option<Vec<f64>>,
}

impl CsrMatrix {
    /// Assembles from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, StructureError> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_rows];
        for &(i, j, v) in triplets {
            if j >= n_cols || i >= n_rows {
                return Err(StructureError::ColumnOutOfRange { row: i, key: j, n_cols });
            }
            rows[i].push((j, v));
        }
        let mut m = Self::with_capacity(n_rows, n_cols, triplets.len());
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (j, v) in r {
                if last == Some(j) {
                    *m.vals.last_mut().expect("entry pushed") += v;
                } else {
                    m.col_idx.push(j);
                    m.vals.push(v);
                    last = Some(j);
                }
            }
            m.row_ptr.push(m.col_idx.len());
        }
        Ok(m)
    }

    /// Stores every nonzero entry of a dense matrix.
    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut m = Self::with_capacity(a.n_rows(), a.n_cols(), 0);
        for i in 0..a.n_rows() {
            for (j, &v) in a.row(i).iter().enumerate() {
                if v != 0.0 {
                    m.col_idx.push(j);
                    m.vals.push(v);
                }
            }
            m.row_ptr.push(m.col_idx.len());
        }
        m
    }

    fn with_capacity(n_rows: usize, n_cols: usize, nnz: usize) -> Self {
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        row_ptr.push(0);
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx: Vec::with_capacity(nnz),
            vals: Vec::with_capacity(nnz),
            rhs: None,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn vals(&self) -> &[f64] {
        &self.vals
    }

    pub fn rhs(&self) -> Option<&[f64]> {
        self.rhs.as_deref()
    }

    pub fn set_rhs(&mut self, rhs: Option<Vec<f64>>) {
        if let Some(r) = &rhs {
            assert_eq!(r.len(), self.n_rows, "rhs length must equal row count");
        }
        self.rhs = rhs;
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.vals[a..b])
    }

    /// Stored value at `(i, j)`, 0 when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, v)| v * x[j]).sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Structure of the stored entries, structural zeros included.
    pub fn pattern(&self) -> SparsityPattern {
        SparsityPattern {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            rows: (0..self.n_rows).map(|i| self.row(i).0.to_vec()).collect(),
        }
    }
}

fn check_row(row: usize, r: &ADScalar, n_cols: usize) -> Result<(), StructureError> {
    match r.deps().last_key() {
        Some(key) if key >= n_cols => Err(StructureError::ColumnOutOfRange { row, key, n_cols }),
        _ => Ok(()),
    }
}

/// Row `i` of the pattern is the dependency key set of `residuals[i]`.
pub fn extract_pattern(
    residuals: &[ADScalar],
    n_cols: usize,
) -> Result<SparsityPattern, StructureError> {
    let mut rows = Vec::with_capacity(residuals.len());
    for (i, r) in residuals.iter().enumerate() {
        check_row(i, r, n_cols)?;
        rows.push(r.deps().keys().collect());
    }
    Ok(SparsityPattern {
        n_rows: residuals.len(),
        n_cols,
        rows,
    })
}

/// Residual values and sparse Jacobian from one evaluated residual vector.
pub fn assemble_csr(residuals: &[ADScalar], n_cols: usize) -> Result<CsrMatrix, StructureError> {
    let nnz = residuals.iter().map(|r| r.deps().len()).sum();
    let mut m = CsrMatrix::with_capacity(residuals.len(), n_cols, nnz);
    let mut rhs = Vec::with_capacity(residuals.len());
    for (i, r) in residuals.iter().enumerate() {
        check_row(i, r, n_cols)?;
        for (j, d) in r.deps() {
            m.col_idx.push(j);
            m.vals.push(d);
        }
        m.row_ptr.push(m.col_idx.len());
        rhs.push(r.value());
    }
    m.rhs = Some(rhs);
    Ok(m)
}

/// Gathers a CSR Jacobian from dense-gradient residuals, reading only the
/// positions of an externally supplied pattern.
pub fn assemble_csr_dense(
    residuals: &[DenseADScalar],
    pattern: &SparsityPattern,
) -> CsrMatrix {
    assert_eq!(residuals.len(), pattern.n_rows(), "pattern row count");
    let mut m = CsrMatrix::with_capacity(pattern.n_rows(), pattern.n_cols(), pattern.nnz());
    for (r, cols) in residuals.iter().zip(pattern.rows()) {
        for &j in cols {
            m.col_idx.push(j);
            m.vals.push(r.der(j));
        }
        m.row_ptr.push(m.col_idx.len());
    }
    m.rhs = Some(residuals.iter().map(DenseADScalar::value).collect());
    m
}

/// Bipartite graph with one vertex per equation and one per variable;
/// equation `i` is joined to variable `j` iff `j` is in pattern row `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub n_equations: usize,
    pub n_variables: usize,
    pub edges: Vec<(usize, usize)>,
}

impl DependencyGraph {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Variables adjacent to equation `i`.
    pub fn variables_of(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.0 == i).map(|e| e.1)
    }

    /// Equations adjacent to variable `j`.
    pub fn equations_of(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.1 == j).map(|e| e.0)
    }
}

pub fn to_dependency_graph(p: &SparsityPattern) -> DependencyGraph {
    let edges = p
        .rows()
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().map(move |&j| (i, j)))
        .collect();
    DependencyGraph {
        n_equations: p.n_rows(),
        n_variables: p.n_cols(),
        edges,
    }
}

/// Number formatting for text exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumberFormat {
    /// Shortest representation that parses back to the same `f64`;
    /// integral values print without a decimal point.
    #[default]
    Shortest,
    /// `%g`-style with the given number of significant digits.
    Significant(usize),
}

impl NumberFormat {
    pub fn format(self, v: f64) -> String {
        match self {
            NumberFormat::Shortest => format!("{v}"),
            NumberFormat::Significant(p) => format_significant(v, p.max(1)),
        }
    }
}

/// C `%g` conversion: fixed or scientific notation depending on the
/// decimal exponent, trailing zeros removed.
fn format_significant(v: f64, p: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", p - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn matlab_text(name: &str, rows: impl Iterator<Item = Vec<String>>) -> String {
    let body: Vec<String> = rows.map(|r| r.join(" ")).collect();
    format!("{name} = [{}];", body.join(";\n "))
}

/// Matlab-style dense text rendering.
pub trait MatlabPrint {
    fn to_matlab_with(&self, fmt: NumberFormat) -> String;

    fn to_matlab(&self) -> String {
        self.to_matlab_with(NumberFormat::Shortest)
    }
}

impl MatlabPrint for SparsityPattern {
    /// Renders as `A = [...]` with 0/1 entries; `fmt` is irrelevant.
    fn to_matlab_with(&self, _fmt: NumberFormat) -> String {
        matlab_text(
            "A",
            self.rows.iter().map(|r| {
                let mut line = vec!["0".to_string(); self.n_cols];
                for &j in r {
                    line[j] = "1".to_string();
                }
                line
            }),
        )
    }
}

impl MatlabPrint for CsrMatrix {
    /// Renders as `J = [...]`.
    fn to_matlab_with(&self, fmt: NumberFormat) -> String {
        let dense = self.to_dense();
        matlab_text(
            "J",
            (0..self.n_rows).map(|i| dense.row(i).iter().map(|&v| fmt.format(v)).collect()),
        )
    }
}

const MM_HEADER: &str = "%%MatrixMarket matrix coordinate real general";

/// MatrixMarket coordinate export, 1-based indices.
pub trait MatrixMarketWrite {
    fn write_matrix_market<W: Write>(&self, w: W) -> io::Result<()>;
}

impl MatrixMarketWrite for SparsityPattern {
    fn write_matrix_market<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{MM_HEADER}")?;
        writeln!(w, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for (i, r) in self.rows.iter().enumerate() {
            for &j in r {
                writeln!(w, "{} {} 1", i + 1, j + 1)?;
            }
        }
        Ok(())
    }
}

impl MatrixMarketWrite for CsrMatrix {
    fn write_matrix_market<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{MM_HEADER}")?;
        writeln!(w, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let mut line = String::new();
            for (&j, &v) in cols.iter().zip(vals) {
                line.clear();
                write!(line, "{} {} {v:e}", i + 1, j + 1).expect("string write");
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    }
}

/// Reads a real, general, coordinate MatrixMarket file.
pub fn read_matrix_market<R: BufRead>(r: R) -> Result<CsrMatrix, StructureError> {
    let bad = |m: &str| StructureError::MatrixMarket(m.to_string());
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad("empty input"))??;
    let h = header.to_ascii_lowercase();
    if !h.starts_with("%%matrixmarket matrix coordinate") || !h.contains("general") {
        return Err(bad("expected a coordinate general header"));
    }
    let is_pattern = h.contains("pattern");
    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        let num = |k: usize| -> Result<usize, StructureError> {
            fields
                .get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(&format!("bad integer field in line `{t}`")))
        };
        match size {
            None => size = Some((num(0)?, num(1)?, num(2)?)),
            Some(_) => {
                let (i, j) = (num(0)?, num(1)?);
                if i == 0 || j == 0 {
                    return Err(bad("indices are 1-based"));
                }
                let v = if is_pattern {
                    1.0
                } else {
                    fields
                        .get(2)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad(&format!("bad value in line `{t}`")))?
                };
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (n_rows, n_cols, nnz) = size.ok_or_else(|| bad("missing size line"))?;
    if triplets.len() != nnz {
        return Err(bad(&format!("expected {nnz} entries, found {}", triplets.len())));
    }
    CsrMatrix::from_triplets(n_rows, n_cols, &triplets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorenz_like() -> Vec<ADScalar> {
        let x = ADScalar::variable(8.0, 0);
        let y = ADScalar::variable(20.0, 1);
        let z = ADScalar::variable(2.0 / 3.0, 2);
        vec![
            (&y - &x) * 10.0,
            &x * &(8.0 / 3.0 - &z) - &y,
            &x * &y - &z * 28.0,
        ]
    }

    #[test]
    fn lorenz_pattern_and_text() {
        let f = lorenz_like();
        let p = extract_pattern(&f, 3).unwrap();
        assert_eq!(p.rows(), &[vec![0, 1], vec![0, 1, 2], vec![0, 1, 2]]);
        assert_eq!(p.to_matlab(), "A = [1 1 0;\n 1 1 1;\n 1 1 1];");
        let j = assemble_csr(&f, 3).unwrap();
        assert_eq!(j.to_matlab(), "J = [-10 10 0;\n 2 -1 -8;\n 20 8 -28];");
        assert_eq!(j.pattern(), p);
        assert_eq!(j.rhs().unwrap()[0], 120.0);
    }

    #[test]
    fn empty_residuals() {
        let p = extract_pattern(&[], 0).unwrap();
        assert_eq!(p.n_rows(), 0);
        assert_eq!(to_dependency_graph(&p).edge_count(), 0);
        assert_eq!(p.to_matlab(), "A = [];");
    }

    #[test]
    fn out_of_range_key_names_row() {
        let f = vec![ADScalar::variable(1.0, 0), ADScalar::variable(1.0, 4)];
        match extract_pattern(&f, 3) {
            Err(StructureError::ColumnOutOfRange { row, key, .. }) => {
                assert_eq!((row, key), (1, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(assemble_csr(&f, 3).is_err());
    }

    #[test]
    fn all_fixed_inputs() {
        let a = ADScalar::fixed(2.0);
        let b = ADScalar::fixed(3.0);
        let f = vec![&a * &b, &a + &b, &a - &b];
        let j = assemble_csr(&f, 3).unwrap();
        assert_eq!(j.n_rows(), 3);
        assert_eq!(j.nnz(), 0);
        assert_eq!(j.rhs().unwrap(), &[6.0, 5.0, -1.0]);
    }

    #[test]
    fn structural_zero_is_stored() {
        let x = ADScalar::variable(2.0, 0);
        let y = ADScalar::variable(3.0, 1);
        let f = vec![(&x * &y) / &y];
        let j = assemble_csr(&f, 2).unwrap();
        assert_eq!(j.nnz(), 2);
        assert_eq!(j.get(0, 1), 0.0);
    }

    #[test]
    fn dependency_graph_edges() {
        let p = extract_pattern(&lorenz_like(), 3).unwrap();
        let g = to_dependency_graph(&p);
        assert_eq!(g.edge_count(), 8);
        assert_eq!(
            g.edges,
            vec![(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)]
        );
        assert_eq!(g.equations_of(2).collect::<Vec<_>>(), vec![1, 2]);
        let diag = SparsityPattern::from_rows(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(to_dependency_graph(&diag).edge_count(), 3);
    }

    #[test]
    fn one_by_one_zero_matrix() {
        let p = SparsityPattern::from_rows(1, vec![vec![]]).unwrap();
        assert_eq!(p.to_matlab(), "A = [0];");
        let j = CsrMatrix::from_triplets(1, 1, &[]).unwrap();
        assert_eq!(j.to_matlab(), "J = [0];");
    }

    #[test]
    fn significant_digit_format() {
        let f = NumberFormat::Significant(3);
        assert_eq!(f.format(-2.0 / 3.0), "-0.667");
        assert_eq!(f.format(12.0), "12");
        assert_eq!(f.format(0.0), "0");
        assert_eq!(f.format(1234.0), "1.23e+03");
        assert_eq!(f.format(1.5e-5), "1.5e-05");
        assert_eq!(NumberFormat::Significant(6).format(-2.0 / 3.0), "-0.666667");
        assert_eq!(NumberFormat::Shortest.format(-10.0), "-10");
    }

    #[test]
    fn matrix_market_round_trip() {
        let j = assemble_csr(&lorenz_like(), 3).unwrap();
        let mut buf = Vec::new();
        j.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n3 3 8\n"));
        let back = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(back.to_dense(), j.to_dense());

        let p = j.pattern();
        let mut buf = Vec::new();
        p.write_matrix_market(&mut buf).unwrap();
        let back = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(back.pattern(), p);
    }

    #[test]
    fn matrix_market_rejects_bad_input() {
        assert!(read_matrix_market("".as_bytes()).is_err());
        assert!(read_matrix_market("%%MatrixMarket matrix array real general\n".as_bytes()).is_err());
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(read_matrix_market(short.as_bytes()).is_err());
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, -1.0)]).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.mul_vec(&[1.0, 2.0]), vec![6.0, -1.0]);
    }
}
