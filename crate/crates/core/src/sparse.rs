//! Compressed-row sparse matrices and a direct sparse solve.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from `(row, col, value)` triplets, summing duplicates. Column
    /// indices are sorted within each row.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted = triplets.to_vec();
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            assert!(i < nrows && j < ncols, "entry ({i}, {j}) outside {nrows}x{ncols}");
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry exists") += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &t)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let t: Vec<_> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(j, &v)| (i, j, v)))
            .collect();
        Self::from_triplets(rows.len(), ncols, &t)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.ncols];
        for (_, j, v) in self.triplets() {
            s[j] += v;
        }
        s
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        let mut s = vec![0.0; self.ncols];
        for (_, j, v) in self.triplets() {
            s[j] += v.abs();
        }
        s.into_iter().fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

/// Relative accuracy demanded from [`linear_solve`].
pub const SOLVE_TOL: f64 = 1e-12;
const REFINEMENT_STEPS: usize = 2;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solve `A x = b` by sparse LU with up to two steps of iterative refinement.
/// Fails when the factorization breaks down or the backward error
/// `|Ax - b| <= tol (|A| |x| + |b|)` (infinity norms) cannot be met.
pub fn linear_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.nrows != a.ncols {
        return Err(Error::SizeMismatch { what: "square matrix columns", expected: a.nrows, got: a.ncols });
    }
    if b.len() != a.nrows {
        return Err(Error::SizeMismatch { what: "right-hand side", expected: a.nrows, got: b.len() });
    }
    let n = a.nrows;
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix("matrix has non-finite entries".into()));
    }
    let trip: Vec<Triplet<usize, usize, f64>> = a.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::SingularMatrix(format!("cannot build sparse matrix: {e:?}")))?;
    let lu = m.sp_lu().map_err(|e| Error::SingularMatrix(format!("LU factorization failed: {e:?}")))?;
    let solve = |rhs: &[f64]| -> Vec<f64> {
        let col = Col::<f64>::from_fn(n, |i| rhs[i]);
        let x = lu.solve(&col);
        (0..n).map(|i| x[i]).collect()
    };

    let norm_a = a.norm_inf();
    let norm_b = inf_norm(b);
    let mut x = solve(b);
    for step in 0..=REFINEMENT_STEPS {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix("solution is not finite".into()));
        }
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let res = inf_norm(&r);
        let bound = SOLVE_TOL * (norm_a * inf_norm(&x) + norm_b);
        if res <= bound {
            return Ok(x);
        }
        if step == REFINEMENT_STEPS {
            return Err(Error::SingularMatrix(format!(
                "backward error {res:e} above {bound:e} after refinement"
            )));
        }
        let dx = solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    unreachable!("loop returns on its last step")
}
