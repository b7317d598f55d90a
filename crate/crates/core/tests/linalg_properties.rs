use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sad_core::linalg::{dense_solve, lu_factor, lu_solve, DenseMatrix};
use sad_core::structure::{read_matrix_market, CsrMatrix, MatlabPrint, MatrixMarketWrite, NumberFormat};

/// Nonsingular sparse matrix with rows shuffled so pivoting is exercised:
/// a dominant (shuffled) diagonal plus about `per_row` random entries per row.
fn random_sparse(n: usize, per_row: usize, rng: &mut ChaCha8Rng) -> CsrMatrix {
    let mut trip = Vec::new();
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    for (j, &i) in rows.iter().enumerate() {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        trip.push((i, j, sign * rng.gen_range(per_row as f64 + 1.0..per_row as f64 + 3.0)));
        for _ in 0..per_row {
            trip.push((i, rng.gen_range(0..n), rng.gen_range(-1.0..1.0)));
        }
    }
    CsrMatrix::from_triplets(n, n, &trip).unwrap()
}

fn permuted_rows(a: &DenseMatrix, perm: &[usize]) -> DenseMatrix {
    DenseMatrix::from_rows(&perm.iter().map(|&p| a.row(p).to_vec()).collect::<Vec<_>>())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn lu_matches_dense_solver_on_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let n = rng.gen_range(1..=200);
        let a = random_sparse(n, rng.gen_range(1..5), &mut rng);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let x = lu_solve(&lu_factor(&a).unwrap(), &b).unwrap();
        let oracle = dense_solve(&a.to_dense(), &b).unwrap();
        let diff: Vec<f64> = x.iter().zip(&oracle).map(|(p, q)| p - q).collect();
        assert!(max_abs(&diff) <= 1e-9 * max_abs(&oracle).max(1e-300), "case {case} (n = {n})");
    }
}

#[test]
fn lu_reconstructs_permuted_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let n = rng.gen_range(1..=100);
        let a = random_sparse(n, 3, &mut rng);
        let f = lu_factor(&a).unwrap();
        let pa = permuted_rows(&a.to_dense(), f.perm());
        let lu = f.l_dense().matmul(&f.u_dense());
        assert!(pa.sub(&lu).max_abs() <= 1e-12 * pa.max_abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residual_of_lu_solution_is_small(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_sparse(n, 2, &mut rng);
        let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.mul_vec(&x_true);
        let x = lu_solve(&lu_factor(&a).unwrap(), &b).unwrap();
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        prop_assert!(max_abs(&r) <= 1e-11 * max_abs(&b).max(1.0));
    }

    #[test]
    fn matrix_market_round_trip(seed in any::<u64>(), n in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_sparse(n, 2, &mut rng);
        let mut buf = Vec::new();
        a.write_matrix_market(&mut buf).unwrap();
        let back = read_matrix_market(buf.as_slice()).unwrap();
        prop_assert_eq!(back.to_dense(), a.to_dense());
        prop_assert_eq!(back.nnz(), a.nnz());

        let p = a.pattern();
        let mut buf = Vec::new();
        p.write_matrix_market(&mut buf).unwrap();
        prop_assert_eq!(read_matrix_market(buf.as_slice()).unwrap().pattern(), p);
    }

    #[test]
    fn matlab_text_round_trip(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_sparse(n, 2, &mut rng).to_dense();
        let text = CsrMatrix::from_dense(&a).to_matlab_with(NumberFormat::Shortest);
        prop_assert_eq!(parse_matlab(&text, "J"), a);
    }
}

/// Parser for the `NAME = [a b;\n c d];` form, used as an independent check
/// of the writer.
fn parse_matlab(text: &str, name: &str) -> DenseMatrix {
    let body = text
        .strip_prefix(&format!("{name} = ["))
        .and_then(|s| s.strip_suffix("];"))
        .expect("matlab framing");
    let rows: Vec<Vec<f64>> = body
        .split(';')
        .map(|r| r.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect();
    DenseMatrix::from_rows(&rows)
}

#[test]
fn matlab_parser_reads_pattern_text() {
    let a = DenseMatrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]]);
    let p = CsrMatrix::from_dense(&a).pattern();
    assert_eq!(parse_matlab(&p.to_matlab(), "A"), a);
}
