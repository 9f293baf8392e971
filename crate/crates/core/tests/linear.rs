use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use richards_core::mmatrix::{inverse_norm_bound, mmatrix_analyze};
use richards_core::sparse::{linear_solve, CsrMatrix};
use richards_core::Error;

/// Random sparse column-wise M-matrix: nonpositive off-diagonals and a
/// diagonal exceeding each column's off-diagonal mass by `margin`.
fn random_m_matrix(rng: &mut ChaCha8Rng, n: usize, density: f64, margin: f64) -> CsrMatrix {
    let mut trip = Vec::new();
    let mut col_mass = vec![0.0; n];
    for k in 0..n {
        for l in 0..n {
            if l != k && rng.gen_bool(density) {
                let v = -rng.gen_range(0.1..2.0);
                trip.push((l, k, v));
                col_mass[k] -= v;
            }
        }
    }
    for (k, m) in col_mass.iter().enumerate() {
        trip.push((k, k, m + margin));
    }
    CsrMatrix::from_triplets(n, n, &trip)
}

fn dense(a: &CsrMatrix) -> DMatrix<f64> {
    let d = a.to_dense();
    DMatrix::from_fn(a.nrows, a.ncols, |i, j| d[i][j])
}

proptest! {
    #[test]
    fn solve_matches_dense_lu(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_m_matrix(&mut rng, n, 0.15, 0.5);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = linear_solve(&a, &b).unwrap();
        let oracle = dense(&a).lu().solve(&DVector::from_vec(b.clone())).unwrap();
        let scale = oracle.amax().max(1.0);
        for i in 0..n {
            prop_assert!((x[i] - oracle[i]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn solve_handles_nonsymmetric_general_matrices(seed in any::<u64>(), n in 2usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, rng.gen_range(2.0..4.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }));
            for _ in 0..2 {
                trip.push((i, rng.gen_range(0..n), rng.gen_range(-0.5..0.5)));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &trip);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let da = dense(&a);
        prop_assume!(da.clone().lu().determinant().abs() > 1e-8);
        let x = linear_solve(&a, &b).unwrap();
        let r = &da * DVector::from_vec(x) - DVector::from_vec(b);
        prop_assert!(r.amax() <= 1e-12 * da.amax().max(1.0));
    }

    /// Inverse positivity and the inverse-norm bound on random M-matrices.
    #[test]
    fn m_matrix_inverse(seed in any::<u64>(), n in 2usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_m_matrix(&mut rng, n, 0.3, 0.2);
        let d = a.to_dense();
        let delta = (0..n).map(|k| d[k][k]).fold(f64::INFINITY, f64::min).min(0.2);
        let big = (0..n).map(|k| d[k][k]).fold(0.0, f64::max);
        let report = mmatrix_analyze(&a, delta, big);
        prop_assert!(report.is_column_wise, "{:?}", report.failures);
        let inv = dense(&a).try_inverse().unwrap();
        prop_assert!(inv.iter().all(|&v| v >= -1e-12));
        let norm1 = (0..n).map(|j| inv.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let bound = inverse_norm_bound(delta, big, report.max_path_len).unwrap();
        prop_assert!(norm1 <= bound * (1.0 + 1e-12), "{} > {}", norm1, bound);
    }

    /// Only column 0 is strictly dominant; a chain `k -> k-1` of entries
    /// below `-delta` links every other column to it.
    #[test]
    fn m_matrix_inverse_with_paths(seed in any::<u64>(), n in 2usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trip = Vec::new();
        let mut col_mass = vec![0.0; n];
        for k in 1..n {
            let v = -rng.gen_range(0.5..1.5);
            trip.push((k - 1, k, v));
            col_mass[k] -= v;
        }
        for k in 0..n {
            for l in 0..n {
                if l != k && l + 1 != k && rng.gen_bool(0.1) {
                    let v = -rng.gen_range(0.0..0.3);
                    trip.push((l, k, v));
                    col_mass[k] -= v;
                }
            }
        }
        for (k, m) in col_mass.iter().enumerate() {
            trip.push((k, k, m + if k == 0 { 0.4 } else { 0.0 }));
        }
        let a = CsrMatrix::from_triplets(n, n, &trip);
        let d = a.to_dense();
        let delta = 0.3_f64.min((0..n).map(|k| d[k][k]).fold(f64::INFINITY, f64::min));
        let big = (0..n).map(|k| d[k][k]).fold(0.0, f64::max);
        let report = mmatrix_analyze(&a, delta, big);
        prop_assert!(report.is_column_wise, "{:?}", report.failures);
        prop_assert_eq!(report.strict_columns.clone(), vec![0]);
        prop_assert!(report.max_path_len <= n - 1);
        let inv = dense(&a).try_inverse().unwrap();
        prop_assert!(inv.iter().all(|&v| v >= -1e-12));
        let norm1 = (0..n).map(|j| inv.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let bound = inverse_norm_bound(delta, big, report.max_path_len).unwrap();
        prop_assert!(norm1 <= bound * (1.0 + 1e-12), "{} > {}", norm1, bound);
    }
}

#[test]
fn singular_matrix_is_reported() {
    let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
    assert!(matches!(linear_solve(&a, &[1.0, 1.0]), Err(Error::SingularMatrix(_))));
    let z = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 1.0)]);
    assert!(matches!(linear_solve(&z, &[1.0, 1.0, 1.0]), Err(Error::SingularMatrix(_))));
}

#[test]
fn size_mismatch_is_reported() {
    let a = CsrMatrix::identity(3);
    assert!(linear_solve(&a, &[1.0, 2.0]).is_err());
}
