//! Implicit two-point finite-volume scheme: residual, exact Jacobian, and
//! discretization of initial and boundary data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hydro::{GraphPoint, Parametrization};
use crate::mesh::{dot, BoundingBox, Edge, EdgeKind, Mesh, Point};
use crate::sparse::CsrMatrix;

/// Cap applied to `s'` during assembly. The u-formulation has `s'(0) = inf`;
/// any smaller cap distorts Newton in dry cells, where `s'` reaches 1e19 and
/// beyond for `s = 1e-6`.
pub const SATURATION_SLOPE_CAP: f64 = 1e300;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub tau: Vec<f64>,
    /// Indexed by edge id; only Dirichlet entries are meaningful.
    pub boundary_tau: Vec<f64>,
    pub step: usize,
}

/// Data of one implicit time step.
#[derive(Debug, Clone)]
pub struct StepProblem<'a> {
    pub mesh: &'a Mesh,
    pub param: &'a Parametrization,
    pub gravity: Point,
    pub dt: f64,
    /// `s(tau^{n-1})` per cell.
    pub prev_saturation: &'a [f64],
    /// Indexed by edge id, see [`State::boundary_tau`].
    pub boundary_tau: &'a [f64],
}

impl<'a> StepProblem<'a> {
    pub fn new(
        mesh: &'a Mesh,
        param: &'a Parametrization,
        gravity: Point,
        dt: f64,
        prev_saturation: &'a [f64],
        boundary_tau: &'a [f64],
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        check_len("previous saturation", mesh.num_cells(), prev_saturation.len())?;
        check_len("boundary values", mesh.num_edges(), boundary_tau.len())?;
        Ok(StepProblem { mesh, param, gravity, dt, prev_saturation, boundary_tau })
    }

    fn check_tau(&self, tau: &[f64]) -> Result<()> {
        check_len("tau", self.mesh.num_cells(), tau.len())
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::SizeMismatch { what, expected, got });
    }
    Ok(())
}

/// Piecewise-constant saturation: disjoint axis-aligned boxes over a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialSaturation {
    pub default: f64,
    #[serde(default)]
    pub regions: Vec<SaturationRegion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationRegion {
    #[serde(rename = "box")]
    pub bounds: BoundingBox,
    pub value: f64,
}

impl InitialSaturation {
    pub fn uniform(value: f64) -> Self {
        InitialSaturation { default: value, regions: Vec::new() }
    }

    fn check(&self) -> Result<()> {
        let bad = |v: f64| !(0.0..=1.0).contains(&v);
        if bad(self.default) || self.regions.iter().any(|r| bad(r.value)) {
            return Err(Error::Config("initial saturation values must lie in [0, 1]".into()));
        }
        for (i, a) in self.regions.iter().enumerate() {
            for b in &self.regions[i + 1..] {
                if box_overlap(&a.bounds, &b.bounds) > 0.0 {
                    return Err(Error::Config(format!(
                        "initial saturation regions {:?} and {:?} overlap",
                        a.bounds, b.bounds
                    )));
                }
            }
        }
        Ok(())
    }
}

fn box_overlap(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let w = a.max[0].min(b.max[0]) - a.min[0].max(b.min[0]);
    let h = a.max[1].min(b.max[1]) - a.min[1].max(b.min[1]);
    w.max(0.0) * h.max(0.0)
}

fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

/// Sutherland-Hodgman clip of a convex or simple polygon against a box.
fn clip_to_box(poly: &[Point], bx: &BoundingBox) -> Vec<Point> {
    // each half plane as (axis, bound, keep_greater)
    let planes = [(0, bx.min[0], true), (0, bx.max[0], false), (1, bx.min[1], true), (1, bx.max[1], false)];
    let mut out = poly.to_vec();
    for (axis, bound, greater) in planes {
        if out.is_empty() {
            break;
        }
        let inside = |p: &Point| if greater { p[axis] >= bound } else { p[axis] <= bound };
        let input = std::mem::take(&mut out);
        for i in 0..input.len() {
            let cur = input[i];
            let prev = input[(i + input.len() - 1) % input.len()];
            let cross = |a: Point, b: Point| {
                let t = (bound - a[axis]) / (b[axis] - a[axis]);
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            };
            match (inside(&prev), inside(&cur)) {
                (true, true) => out.push(cur),
                (true, false) => out.push(cross(prev, cur)),
                (false, true) => {
                    out.push(cross(prev, cur));
                    out.push(cur);
                }
                (false, false) => {}
            }
        }
    }
    out
}

/// Fraction of the cell covered by the box.
fn covered_fraction(mesh: &Mesh, cell: usize, bx: &BoundingBox) -> f64 {
    let c = &mesh.cells[cell];
    match c.vertices.len() {
        0 => f64::from(u8::from(bx.contains(c.center))),
        2 => {
            let (a, b) = (c.vertices[0][0].min(c.vertices[1][0]), c.vertices[0][0].max(c.vertices[1][0]));
            let overlap = (b.min(bx.max[0]) - a.max(bx.min[0])).max(0.0);
            overlap / (b - a)
        }
        _ => {
            let clipped = clip_to_box(&c.vertices, bx);
            if clipped.len() < 3 {
                0.0
            } else {
                (polygon_area(&clipped) / polygon_area(&c.vertices)).clamp(0.0, 1.0)
            }
        }
    }
}

/// Cell averages of a piecewise-constant saturation field. Exact for cells with
/// known polygons; cells of file meshes are classified by their center.
pub fn cell_averages(mesh: &Mesh, init: &InitialSaturation) -> Result<Vec<f64>> {
    init.check()?;
    Ok((0..mesh.num_cells())
        .map(|k| {
            let mut rest = 1.0;
            let mut acc = 0.0;
            for r in &init.regions {
                let f = covered_fraction(mesh, k, &r.bounds);
                acc += f * r.value;
                rest -= f;
            }
            (acc + rest.max(0.0) * init.default).clamp(0.0, 1.0)
        })
        .collect())
}

/// Initial state `tau^0 = s^{-1}(s^0)` with Dirichlet values attached.
pub fn discretize_initial(
    mesh: &Mesh,
    param: &Parametrization,
    init: &InitialSaturation,
    boundary_tau: Vec<f64>,
) -> Result<State> {
    check_len("boundary values", mesh.num_edges(), boundary_tau.len())?;
    let tau = cell_averages(mesh, init)?
        .into_iter()
        .map(|s| param.sat_inverse(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(State { tau, boundary_tau, step: 0 })
}

/// `tau_D = tau(p_D)` on every Dirichlet edge, zero elsewhere.
pub fn discretize_boundary(mesh: &Mesh, param: &Parametrization, p_dirichlet: f64) -> Vec<f64> {
    let tau_d = param.tau_of_pressure(p_dirichlet);
    mesh.edges.iter().map(|e| if e.is_dirichlet() { tau_d } else { 0.0 }).collect()
}

fn positive_part(x: f64) -> f64 {
    x.max(0.0)
}

fn negative_part(x: f64) -> f64 {
    (-x).max(0.0)
}

fn flux(problem: &StepProblem<'_>, edge: &Edge, from: usize, own: GraphPoint, other: GraphPoint) -> f64 {
    let model = &problem.param.model;
    let g = dot(problem.gravity, edge.normal_from(from));
    edge.measure * (model.mobility(own.s) * positive_part(g) - model.mobility(other.s) * negative_part(g))
        + edge.transmissibility * (own.u - other.u)
}

/// `F_{K,sigma}` seen from cell `from`, with `tau_other` the value on the other
/// side of the edge (neighbour cell or Dirichlet datum).
pub fn edge_flux(problem: &StepProblem<'_>, tau_own: f64, tau_other: f64, edge: &Edge, from: usize) -> f64 {
    flux(problem, edge, from, problem.param.eval(tau_own), problem.param.eval(tau_other))
}

/// `f_K = s(tau_K) - s_K^{n-1} + dt / m_K * sum_sigma F_{K,sigma}`.
pub fn residual(problem: &StepProblem<'_>, tau: &[f64]) -> Result<Vec<f64>> {
    problem.check_tau(tau)?;
    let mesh = problem.mesh;
    let pts: Vec<GraphPoint> = tau.iter().map(|&t| problem.param.eval(t)).collect();
    let mut sum = vec![0.0; mesh.num_cells()];
    for e in &mesh.edges {
        match e.kind {
            EdgeKind::Interior { cells: [k, l], .. } => {
                // one evaluation per edge keeps the two sides exactly opposite
                let f = flux(problem, e, k, pts[k], pts[l]);
                sum[k] += f;
                sum[l] -= f;
            }
            EdgeKind::Boundary { cell, .. } if e.is_dirichlet() => {
                let bd = problem.param.eval(problem.boundary_tau[e.id]);
                sum[cell] += flux(problem, e, cell, pts[cell], bd);
            }
            EdgeKind::Boundary { .. } => {}
        }
    }
    Ok(mesh
        .cells
        .iter()
        .map(|c| {
            let k = c.id;
            (pts[k].s - problem.prev_saturation[k]) + problem.dt / c.volume * sum[k]
        })
        .collect())
}

/// `s'` with the infinite slope of the u-formulation capped.
fn capped_ds(g: &GraphPoint) -> f64 {
    g.ds.min(SATURATION_SLOPE_CAP)
}

/// Exact Jacobian `d f_L / d tau_K`.
pub fn jacobian(problem: &StepProblem<'_>, tau: &[f64]) -> Result<CsrMatrix> {
    problem.check_tau(tau)?;
    let mesh = problem.mesh;
    let model = &problem.param.model;
    let pts: Vec<GraphPoint> = tau.iter().map(|&t| problem.param.eval(t)).collect();
    let scale: Vec<f64> = mesh.cells.iter().map(|c| problem.dt / c.volume).collect();
    let mut triplets = Vec::with_capacity(mesh.num_cells() + 4 * mesh.num_edges());
    for (k, g) in pts.iter().enumerate() {
        triplets.push((k, k, capped_ds(g)));
    }
    // derivative of F_{K,sigma} with respect to tau_K
    let own = |k: usize, e: &Edge| {
        let g = positive_part(dot(problem.gravity, e.normal_from(k)));
        e.measure * g * model.mobility_derivative(pts[k].s) * capped_ds(&pts[k]) + e.transmissibility * pts[k].du
    };
    for e in &mesh.edges {
        match e.kind {
            EdgeKind::Interior { cells: [k, l], .. } => {
                let ck = own(k, e);
                let cl = own(l, e);
                triplets.push((k, k, scale[k] * ck));
                triplets.push((l, k, -scale[l] * ck));
                triplets.push((l, l, scale[l] * cl));
                triplets.push((k, l, -scale[k] * cl));
            }
            EdgeKind::Boundary { cell, .. } if e.is_dirichlet() => {
                triplets.push((cell, cell, scale[cell] * own(cell, e)));
            }
            EdgeKind::Boundary { .. } => {}
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.num_cells(), mesh.num_cells(), &triplets))
}
