//! Column-wise `(delta, Delta)`-M-matrix analysis of assembled Jacobians.
//!
//! A square matrix is a column-wise `(delta, Delta)`-M-matrix when its
//! off-diagonal entries are nonpositive, its diagonal lies in `[delta, Delta]`,
//! its column sums are nonnegative, the set `I_delta` of columns with sum at
//! least `delta` is not empty, and from every other column there is a path
//! `K = i_0, ..., i_L in I_delta` of distinct indices with
//! `a_{i_{k+1} i_k} < -delta` at every step.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::mesh::{dot, EdgeKind, Mesh, Point};
use crate::sparse::CsrMatrix;

/// Relative slack for rounding in the sign, sum and diagonal tests.
pub const ROUNDING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MMatrixReport {
    pub is_column_wise: bool,
    /// Smallest and largest diagonal entries.
    pub delta_observed: f64,
    pub big_delta_observed: f64,
    /// Columns whose sum is at least `delta`.
    pub strict_columns: Vec<usize>,
    /// For each column: `Some(path)` ending in `I_delta` (a single index for
    /// columns of `I_delta`), `None` when no transmissive path exists.
    pub paths: Vec<Option<Vec<usize>>>,
    /// Longest of the shortest paths, `L`.
    pub max_path_len: usize,
    pub failures: Vec<String>,
}

pub fn mmatrix_analyze(a: &CsrMatrix, delta: f64, big_delta: f64) -> MMatrixReport {
    let n = a.nrows;
    let mut failures = Vec::new();
    if a.ncols != n {
        failures.push(format!("matrix is {}x{}, not square", a.nrows, a.ncols));
        return MMatrixReport {
            is_column_wise: false,
            delta_observed: f64::NAN,
            big_delta_observed: f64::NAN,
            strict_columns: Vec::new(),
            paths: Vec::new(),
            max_path_len: 0,
            failures,
        };
    }

    let mut diag = vec![0.0; n];
    let mut col_sum = vec![0.0; n];
    let mut col_abs = vec![0.0; n];
    // arcs of the column graph reversed: incoming[l] lists k with a_lk < -delta
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, v) in a.triplets() {
        col_sum[j] += v;
        col_abs[j] += v.abs();
        if i == j {
            diag[j] = v;
        } else {
            if v > 0.0 {
                failures.push(format!("positive off-diagonal entry a[{i}][{j}] = {v:e}"));
            }
            if v < -delta {
                incoming[i].push(j);
            }
        }
    }

    for (k, &d) in diag.iter().enumerate() {
        if d < delta * (1.0 - ROUNDING_TOL) || d > big_delta * (1.0 + ROUNDING_TOL) {
            failures.push(format!("diagonal a[{k}][{k}] = {d:e} outside [{delta:e}, {big_delta:e}]"));
        }
        if col_sum[k] < -ROUNDING_TOL * col_abs[k] {
            failures.push(format!("column {k} has negative sum {:e}", col_sum[k]));
        }
    }
    let strict: Vec<usize> = (0..n).filter(|&k| col_sum[k] >= delta * (1.0 - ROUNDING_TOL)).collect();
    if strict.is_empty() && n > 0 {
        failures.push("no column has sum >= delta".into());
    }

    // multi-source BFS from I_delta against the arc direction
    let mut next: Vec<Option<usize>> = vec![None; n];
    let mut dist: Vec<Option<usize>> = vec![None; n];
    let mut queue = VecDeque::new();
    for &k in &strict {
        dist[k] = Some(0);
        queue.push_back(k);
    }
    while let Some(l) = queue.pop_front() {
        let d = dist[l].expect("queued nodes have a distance");
        for &k in &incoming[l] {
            if dist[k].is_none() {
                dist[k] = Some(d + 1);
                next[k] = Some(l);
                queue.push_back(k);
            }
        }
    }
    let paths: Vec<Option<Vec<usize>>> = (0..n)
        .map(|k| {
            dist[k]?;
            let mut p = vec![k];
            let mut cur = k;
            while let Some(l) = next[cur] {
                p.push(l);
                cur = l;
            }
            Some(p)
        })
        .collect();
    for (k, p) in paths.iter().enumerate() {
        if p.is_none() {
            failures.push(format!("no delta-transmissive path from column {k}"));
        }
    }
    let max_path_len = dist.iter().flatten().copied().max().unwrap_or(0);

    MMatrixReport {
        is_column_wise: failures.is_empty(),
        delta_observed: diag.iter().copied().fold(f64::INFINITY, f64::min),
        big_delta_observed: diag.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        strict_columns: strict,
        paths,
        max_path_len,
        failures,
    }
}

/// `(delta, Delta)` of the Jacobian for a parametrization with
/// `alpha_lo <= max(s', u')` and `s', u' <= alpha_hi`.
pub fn jacobian_bounds(
    mesh: &Mesh,
    dt: f64,
    gravity: Point,
    alpha_lo: f64,
    alpha_hi: f64,
    mobility_slope_max: f64,
) -> Result<(f64, f64)> {
    if !(alpha_lo > 0.0) || alpha_hi < alpha_lo {
        return Err(Error::Config(format!("need 0 < alpha_lo <= alpha_hi, got {alpha_lo}, {alpha_hi}")));
    }
    let mut min_ratio = f64::INFINITY;
    let mut max_row = 0.0_f64;
    for c in &mesh.cells {
        let mut acc = 0.0;
        for &ei in &c.edges {
            let e = &mesh.edges[ei];
            min_ratio = min_ratio.min(e.transmissibility / c.volume);
            let carries_flux = matches!(e.kind, EdgeKind::Interior { .. }) || e.is_dirichlet();
            if carries_flux {
                let g = dot(gravity, e.normal_from(c.id)).max(0.0);
                acc += e.measure * g * mobility_slope_max + e.transmissibility;
            }
        }
        max_row = max_row.max(1.0 + dt / c.volume * acc);
    }
    let delta = alpha_lo * 1f64.min(dt * min_ratio);
    Ok((delta, alpha_hi * max_row))
}

/// `c_{L+1} = ((Delta/delta)^{L+1} - 1) / (Delta - delta)`, a bound on the
/// inverse norm of a `(delta, Delta)`-M-matrix with path length `L`.
/// For `delta = Delta` the limit `(L+1) / delta` is returned.
pub fn inverse_norm_bound(delta: f64, big_delta: f64, max_path_len: usize) -> Result<f64> {
    if !(delta > 0.0) || big_delta < delta {
        return Err(Error::OutOfRange(format!("need 0 < delta <= Delta, got {delta}, {big_delta}")));
    }
    let p = max_path_len as f64 + 1.0;
    if big_delta - delta <= 1e-12 * big_delta {
        return Ok(p / delta);
    }
    let ratio = big_delta / delta;
    Ok((ratio.powf(p) - 1.0) / (big_delta - delta))
}
