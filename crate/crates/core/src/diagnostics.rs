//! Error metrics, conservation, energy, and structural checks on trajectories.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hydro::Parametrization;
use crate::mesh::{discrete_h1_inner, CellEdgeValues, Mesh, Point};
use crate::newton::NewtonReport;
use crate::scheme::{jacobian, residual, StepProblem};
use crate::sparse::linear_solve;

/// The sequence of states of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub mesh: Arc<Mesh>,
    pub param: Parametrization,
    pub gravity: Point,
    /// Indexed by edge id; only Dirichlet entries are meaningful.
    pub boundary_tau: Vec<f64>,
    /// `t^0, ..., t^N`.
    pub times: Vec<f64>,
    /// `tau^0, ..., tau^N`.
    pub tau: Vec<Vec<f64>>,
    /// One report per completed step.
    pub reports: Vec<NewtonReport>,
}

impl Trajectory {
    pub fn new(mesh: Arc<Mesh>, param: Parametrization, gravity: Point, boundary_tau: Vec<f64>, tau0: Vec<f64>) -> Self {
        Trajectory { mesh, param, gravity, boundary_tau, times: vec![0.0], tau: vec![tau0], reports: Vec::new() }
    }

    pub fn push(&mut self, t: f64, tau: Vec<f64>, report: NewtonReport) {
        self.times.push(t);
        self.tau.push(tau);
        self.reports.push(report);
    }

    pub fn steps(&self) -> usize {
        self.reports.len()
    }

    pub fn saturation(&self, n: usize) -> Vec<f64> {
        self.tau[n].iter().map(|&t| self.param.saturation(t)).collect()
    }

    pub fn field(&self, n: usize, field: Field) -> Vec<f64> {
        self.tau[n].iter().map(|&t| field.of(&self.param, t)).collect()
    }

    pub fn total_newton_iterations(&self) -> usize {
        self.reports.iter().map(|r| r.iterations).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Saturation,
    Kirchhoff,
}

impl Field {
    fn of(self, p: &Parametrization, tau: f64) -> f64 {
        match self {
            Field::Saturation => p.saturation(tau),
            Field::Kirchhoff => p.kirchhoff(tau),
        }
    }
}

fn same_mesh(a: &Arc<Mesh>, b: &Arc<Mesh>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

fn check_grids(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if !same_mesh(&a.mesh, &b.mesh) {
        return Err(Error::Incompatible("trajectories live on different meshes".into()));
    }
    if a.times.len() != b.times.len() {
        return Err(Error::Incompatible(format!("{} vs {} time levels", a.times.len(), b.times.len())));
    }
    for (n, (x, y)) in a.times.iter().zip(&b.times).enumerate() {
        if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
            return Err(Error::Incompatible(format!("time level {n} differs: {x} vs {y}")));
        }
    }
    Ok(())
}

fn weighted_l1(mesh: &Mesh, v: impl Iterator<Item = f64>) -> f64 {
    mesh.cells.iter().zip(v).map(|(c, x)| c.volume * x.abs()).sum()
}

/// `sum_K m_K |field(tau^n) - field(tau_ref^n)|` for every time level.
/// Each trajectory's field is computed through its own parametrization.
pub fn l1_error_series(traj: &Trajectory, reference: &Trajectory, field: Field) -> Result<Vec<f64>> {
    check_grids(traj, reference)?;
    Ok((0..traj.times.len())
        .map(|n| {
            let a = traj.field(n, field);
            let b = reference.field(n, field);
            weighted_l1(&traj.mesh, a.iter().zip(&b).map(|(x, y)| x - y))
        })
        .collect())
}

/// `sum_K m_K |field(tau^n)|` for every time level.
pub fn l1_norm_series(traj: &Trajectory, field: Field) -> Vec<f64> {
    (0..traj.times.len()).map(|n| weighted_l1(&traj.mesh, traj.field(n, field).into_iter())).collect()
}

/// Discrete `L^inf(L^1)` error relative to the reference's `L^inf(L^1)` norm.
pub fn linf_l1_error(traj: &Trajectory, reference: &Trajectory, field: Field) -> Result<f64> {
    let num = l1_error_series(traj, reference, field)?.into_iter().fold(0.0, f64::max);
    let den = l1_norm_series(reference, field).into_iter().fold(0.0, f64::max);
    if den == 0.0 {
        return Err(Error::MetricRefused("reference field vanishes identically".into()));
    }
    Ok(num / den)
}

/// `max_n |sum_K m_K s(tau_K^n) - M| / M` with `M` the initial mass.
/// Only meaningful without Dirichlet edges.
pub fn mass_error(traj: &Trajectory) -> Result<f64> {
    if traj.mesh.has_dirichlet() {
        return Err(Error::MetricRefused("mass is not conserved with Dirichlet boundary edges".into()));
    }
    let mass = |n: usize| -> f64 { traj.mesh.cells.iter().zip(traj.saturation(n)).map(|(c, s)| c.volume * s).sum() };
    let m0 = mass(0);
    if m0 == 0.0 {
        return Err(Error::MetricRefused("initial mass is zero".into()));
    }
    Ok((0..traj.times.len()).map(|n| (mass(n) - m0).abs()).fold(0.0, f64::max) / m0)
}

/// `sum_K m_K int_{r_K}^{tau_K} (a - r_K) s'(a) da`, in closed form.
pub fn free_energy(mesh: &Mesh, param: &Parametrization, tau: &[f64], reference: &[f64]) -> Result<f64> {
    if tau.len() != mesh.num_cells() || reference.len() != mesh.num_cells() {
        return Err(Error::SizeMismatch { what: "energy arguments", expected: mesh.num_cells(), got: tau.len().min(reference.len()) });
    }
    Ok(mesh
        .cells
        .iter()
        .map(|c| {
            let (t, r) = (tau[c.id], reference[c.id]);
            let e = (t - r) * param.saturation(t) - (param.saturation_integral(t) - param.saturation_integral(r));
            c.volume * e
        })
        .sum())
}

/// Squared discrete `H^1` seminorm of `xi(tau)`, with Dirichlet terms built
/// from `xi(tau_D)`.
pub fn xi_seminorm(mesh: &Mesh, param: &Parametrization, tau: &[f64], boundary_tau: &[f64]) -> Result<f64> {
    let v = CellEdgeValues {
        cells: tau.iter().map(|&t| param.xi(t)).collect(),
        edges: boundary_tau.iter().map(|&t| param.xi(t)).collect(),
    };
    discrete_h1_inner(mesh, &v, &v)
}

/// Allowed growth per step of the `L^1` distance between two runs solved
/// with tolerance `eps`.
pub fn contraction_slack(eps: f64, dt: f64, mesh: &Mesh) -> f64 {
    10.0 * eps * dt * mesh.measure()
}

/// `d^n - d^{n-1}` with `d^n = sum_K m_K |s(tau_a^n) - s(tau_b^n)|`, for
/// `n = 1..=N`. Both runs must share mesh, model, boundary data, and grid.
pub fn contraction_check(a: &Trajectory, b: &Trajectory) -> Result<Vec<f64>> {
    check_grids(a, b)?;
    if a.param != b.param || a.gravity != b.gravity || a.boundary_tau != b.boundary_tau {
        return Err(Error::Incompatible("runs differ in model, gravity, or boundary data".into()));
    }
    let dist: Vec<f64> = (0..a.times.len())
        .map(|n| {
            let (sa, sb) = (a.saturation(n), b.saturation(n));
            weighted_l1(&a.mesh, sa.iter().zip(&sb).map(|(x, y)| x - y))
        })
        .collect();
    Ok(dist.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Smallest `tau` over all cells and time levels.
pub fn min_tau(traj: &Trajectory) -> f64 {
    traj.tau.iter().flatten().copied().fold(f64::INFINITY, f64::min)
}

/// Residual level at which Newton stagnates near the converged `tau`: the
/// largest residual over `extra` further Newton steps.
pub fn stagnation_level(problem: &StepProblem<'_>, tau: &[f64], extra: usize) -> Result<f64> {
    let mut tau = tau.to_vec();
    let mut level = 0.0_f64;
    for _ in 0..extra {
        let f = residual(problem, &tau)?;
        level = level.max(f.iter().map(|v| v.abs()).sum());
        let d = linear_solve(&jacobian(problem, &tau)?, &f)?;
        for (t, d) in tau.iter_mut().zip(d) {
            *t -= d;
        }
    }
    Ok(level)
}

/// The smallest `C` with `r_{k+1} <= C r_k^2` on the last three residuals of
/// `history` above `floor`. `None` when fewer than three remain.
pub fn quadratic_constant(history: &[f64], floor: f64) -> Option<f64> {
    let above: Vec<f64> = history.iter().copied().filter(|&r| r > floor).collect();
    let [a, b, c] = above[above.len().checked_sub(3)?..] else { return None };
    Some((b / (a * a)).max(c / (b * b)))
}

/// Estimated order `p` of `r_{k+1} ~ C r_k^p` from the last three residuals of
/// `history` lying above `floor`. `None` when fewer than three remain or they
/// do not decrease.
pub fn convergence_order(history: &[f64], floor: f64) -> Option<f64> {
    let above: Vec<f64> = history.iter().copied().filter(|&r| r > floor).collect();
    let [a, b, c] = above[above.len().checked_sub(3)?..] else { return None };
    if !(a > b && b > c) {
        return None;
    }
    Some((c / b).ln() / (b / a).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::{BrooksCorey, EtaMode, Formulation};
    use crate::mesh::{build_rect_mesh, BoundingBox};

    fn setup(kind: Formulation) -> (Arc<Mesh>, Parametrization) {
        let mesh = Arc::new(build_rect_mesh(4, 4, BoundingBox::unit_square()).unwrap());
        let p = Parametrization::new(kind, BrooksCorey::new(-0.01, 4.0, EtaMode::Derived).unwrap());
        (mesh, p)
    }

    fn traj(mesh: &Arc<Mesh>, p: Parametrization, levels: &[Vec<f64>]) -> Trajectory {
        let mut t = Trajectory::new(mesh.clone(), p, [0.0, 0.0], vec![0.0; mesh.num_edges()], levels[0].clone());
        for (n, l) in levels.iter().enumerate().skip(1) {
            t.push(n as f64, l.clone(), NewtonReport::default());
        }
        t
    }

    #[test]
    fn self_error_is_zero() {
        let (mesh, p) = setup(Formulation::Tau);
        let a = traj(&mesh, p, &[vec![0.2; 16], vec![0.3; 16]]);
        assert_eq!(linf_l1_error(&a, &a, Field::Saturation).unwrap(), 0.0);
        assert_eq!(linf_l1_error(&a, &a, Field::Kirchhoff).unwrap(), 0.0);
    }

    #[test]
    fn constant_offset_on_one_step() {
        let (mesh, p) = setup(Formulation::Tau);
        let r = traj(&mesh, p, &[vec![0.2; 16], vec![0.4; 16]]);
        let a = traj(&mesh, p, &[vec![0.2; 16], vec![0.45; 16]]);
        // offset 0.05 over the unit square, reference norm max(0.2, 0.4)
        let e = linf_l1_error(&a, &r, Field::Saturation).unwrap();
        assert!((e - 0.05 / 0.4).abs() < 1e-14, "{e}");
    }

    #[test]
    fn grid_mismatch_is_refused() {
        let (mesh, p) = setup(Formulation::Tau);
        let a = traj(&mesh, p, &[vec![0.2; 16], vec![0.4; 16]]);
        let b = traj(&mesh, p, &[vec![0.2; 16]]);
        assert!(matches!(linf_l1_error(&a, &b, Field::Saturation), Err(Error::Incompatible(_))));
    }

    #[test]
    fn mass_error_refuses_dirichlet() {
        let (mesh, p) = setup(Formulation::Tau);
        let mut m = (*mesh).clone();
        m.retag_boundary(|_, _| crate::mesh::BoundaryTag::Dirichlet);
        let t = traj(&Arc::new(m), p, &[vec![0.2; 16]]);
        assert!(matches!(mass_error(&t), Err(Error::MetricRefused(_))));
        let ok = traj(&mesh, p, &[vec![0.2; 16], vec![0.2; 16]]);
        assert_eq!(mass_error(&ok).unwrap(), 0.0);
    }

    #[test]
    fn energy_on_linear_branch() {
        let (mesh, p) = setup(Formulation::Tau);
        let e = free_energy(&mesh, &p, &[0.5; 16], &[0.0; 16]).unwrap();
        assert!((e - 0.125).abs() < 1e-15);
        assert_eq!(free_energy(&mesh, &p, &[0.5; 16], &[0.5; 16]).unwrap(), 0.0);
    }

    #[test]
    fn xi_is_affine_on_upper_branch() {
        let (mesh, p) = setup(Formulation::Tau);
        let tau: Vec<f64> = mesh.cells.iter().map(|c| 1.5 + c.center[0]).collect();
        let bd = vec![0.0; mesh.num_edges()];
        let a = xi_seminorm(&mesh, &p, &tau, &bd).unwrap();
        let v = CellEdgeValues { cells: tau.clone(), edges: bd.clone() };
        let b = discrete_h1_inner(&mesh, &v, &v).unwrap();
        assert!((a - b).abs() < 1e-13 * b);
        assert_eq!(xi_seminorm(&mesh, &p, &[0.7; 16], &bd).unwrap(), 0.0);
    }

    #[test]
    fn order_estimates() {
        let quad = [1e-1, 1e-2, 1e-4, 1e-8, 1e-16];
        assert!((convergence_order(&quad, 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((convergence_order(&quad, 1e-12).unwrap() - 2.0).abs() < 1e-12);
        let lin = [1.0, 0.5, 0.25, 0.125];
        assert!((convergence_order(&lin, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(convergence_order(&[1.0, 0.1], 0.0), None);
        assert_eq!(convergence_order(&[1.0, 2.0, 0.1], 0.0), None);
    }

    #[test]
    fn quadratic_constants() {
        let quad = [0.5, 1e-1, 1e-2, 1e-4, 1e-8, 1e-14];
        assert!((quadratic_constant(&quad, 0.0).unwrap() - 100.0).abs() < 1e-6);
        // the stagnated last residual is dropped
        assert!((quadratic_constant(&quad, 1e-12).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(quadratic_constant(&[1.0, 1e-3], 0.0), None);
        let lin = [1e-3, 1e-4, 1e-5];
        assert!((quadratic_constant(&lin, 0.0).unwrap() - 1e3).abs() < 1e-9);
    }

    #[test]
    fn identical_runs_do_not_separate() {
        let (mesh, p) = setup(Formulation::Tau);
        let a = traj(&mesh, p, &[vec![0.2; 16], vec![0.4; 16]]);
        assert_eq!(contraction_check(&a, &a).unwrap(), vec![0.0]);
        assert_eq!(min_tau(&a), 0.2);
    }
}
