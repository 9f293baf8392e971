//! Time marching of one configuration.

use std::sync::Arc;
use std::time::Instant;

use super::config::{MeshSpec, RunConfig};
use crate::diagnostics::{free_energy, linf_l1_error, mass_error, Field, Trajectory};
use crate::error::{Error, Result};
use crate::hydro::{BrooksCorey, Formulation, Parametrization};
use crate::mesh::{build_rect_mesh, load_mesh, BoundaryTag, Mesh};
use crate::newton::{newton_solve_observed, Iterate, NewtonConfig, NewtonReport};
use crate::scheme::{discretize_boundary, discretize_initial, StepProblem};

/// Successful steps in a row before an adaptive step is doubled.
const EASY_STEPS: usize = 5;
/// Adaptive mode gives up below `dt * 2^-MAX_HALVINGS`.
const MAX_HALVINGS: i32 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunErrors {
    pub err_s: f64,
    pub err_u: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: RunConfig,
    pub trajectory: Trajectory,
    /// Every attempted step converged and the final time was reached.
    pub completed: bool,
    pub failure: Option<String>,
    /// Newton reports of attempts that did not converge.
    pub failed_reports: Vec<NewtonReport>,
    /// Attempted steps, failed ones included.
    pub attempted_steps: usize,
    /// Newton iterations over all attempts; a failed attempt counts `max_iter`.
    pub total_newton_iters: usize,
    pub errors: Option<RunErrors>,
    pub mass_error: Option<f64>,
    /// Free energy relative to `tau = 0` at every time level.
    pub energy: Vec<f64>,
    pub wall_ms: u128,
}

impl RunResult {
    pub fn mean_newton_iters(&self) -> f64 {
        if self.attempted_steps == 0 {
            0.0
        } else {
            self.total_newton_iters as f64 / self.attempted_steps as f64
        }
    }

    pub fn iterations_per_step(&self) -> Vec<usize> {
        self.trajectory.reports.iter().map(|r| r.iterations).collect()
    }
}

pub fn model_of(config: &RunConfig) -> Result<BrooksCorey> {
    BrooksCorey::new(config.p_b, config.beta, config.eta_mode)
}

pub fn parametrization_of(config: &RunConfig) -> Result<Parametrization> {
    Ok(Parametrization::new(config.formulation, model_of(config)?))
}

/// Build or load the mesh and tag its boundary.
pub fn build_mesh(config: &RunConfig) -> Result<Mesh> {
    let mut mesh = match &config.mesh {
        MeshSpec::Rect { nx, ny } => build_rect_mesh(*nx, *ny, config.domain)?,
        MeshSpec::File { path } => load_mesh(path)?,
    };
    match &config.dirichlet {
        Some(d) => mesh.retag_boundary(|p, _| if d.region.contains(p) { BoundaryTag::Dirichlet } else { BoundaryTag::NoFlux }),
        None if mesh.has_dirichlet() => {
            return Err(Error::Config("mesh has Dirichlet edges but no Dirichlet pressure is configured".into()));
        }
        None => {}
    }
    Ok(mesh)
}

/// The reference run for `config`: tau-formulation at the reference tolerance.
pub fn reference_config(config: &RunConfig) -> Option<RunConfig> {
    let eps = config.reference_eps?;
    Some(RunConfig {
        formulation: Formulation::Tau,
        eps,
        adaptive_dt: false,
        reference_eps: None,
        snapshot_times: Vec::new(),
        output: None,
        ..config.clone()
    })
}

/// March `config` on `mesh`. `observe(step, iterate)` sees every Newton
/// iterate at which a Jacobian is assembled. Newton failures end the run
/// (or shrink the step in adaptive mode) and are reported in the result.
pub fn simulate(
    config: &RunConfig,
    mesh: Arc<Mesh>,
    mut observe: impl FnMut(usize, &StepProblem<'_>, &Iterate<'_>),
) -> Result<RunResult> {
    config.validate()?;
    let started = Instant::now();
    let param = parametrization_of(config)?;
    let gravity = config.gravity_vector();
    let bd = match &config.dirichlet {
        Some(d) => discretize_boundary(&mesh, &param, d.pressure),
        None => vec![0.0; mesh.num_edges()],
    };
    let state0 = discretize_initial(&mesh, &param, &config.initial, bd.clone())?;
    let newton = NewtonConfig::new(config.eps, config.max_iter)?;
    let mut traj = Trajectory::new(mesh.clone(), param, gravity, bd.clone(), state0.tau);

    let n_steps = config.num_steps();
    let t_final = n_steps as f64 * config.dt;
    let mut failed_reports = Vec::new();
    let mut failure = None;
    let mut attempted = 0;
    let mut total_iters = 0;
    let mut h = config.dt;
    let mut streak = 0;

    loop {
        let n = traj.steps();
        let t_prev = *traj.times.last().expect("trajectory has an initial level");
        let (t_next, dt) = if config.adaptive_dt {
            if t_prev >= t_final - 1e-12 * t_final.max(1.0) {
                break;
            }
            let dt = h.min(t_final - t_prev);
            (t_prev + dt, dt)
        } else {
            if n == n_steps {
                break;
            }
            ((n + 1) as f64 * config.dt, config.dt)
        };
        let prev_s = traj.saturation(n);
        let tau_prev = traj.tau[n].clone();
        let problem = StepProblem::new(&mesh, &param, gravity, dt, &prev_s, &bd)?;
        attempted += 1;
        let outcome = newton_solve_observed(&problem, &tau_prev, &newton, |it| observe(n + 1, &problem, it));
        let reason = match outcome {
            Ok((tau, report)) if report.converged => {
                total_iters += report.iterations;
                traj.push(t_next, tau, report);
                streak += 1;
                if config.adaptive_dt && streak >= EASY_STEPS {
                    h = (2.0 * h).min(config.dt);
                    streak = 0;
                }
                continue;
            }
            Ok((_, report)) => {
                let msg = format!(
                    "step {} (t = {t_next}): no convergence in {} iterations, residual {:e}",
                    n + 1,
                    report.iterations,
                    report.final_residual
                );
                failed_reports.push(report);
                msg
            }
            Err(e @ Error::NewtonBreakdown { .. }) => {
                failed_reports.push(NewtonReport::default());
                format!("step {} (t = {t_next}): {e}", n + 1)
            }
            Err(e) => return Err(e),
        };
        total_iters += config.max_iter;
        if config.adaptive_dt && h > config.dt * 2f64.powi(-MAX_HALVINGS) {
            h *= 0.5;
            streak = 0;
            continue;
        }
        failure = Some(reason);
        break;
    }

    let energy = traj
        .tau
        .iter()
        .map(|t| free_energy(&mesh, &param, t, &vec![0.0; t.len()]))
        .collect::<Result<Vec<_>>>()?;
    let completed = failure.is_none();
    let mass = if completed && !mesh.has_dirichlet() { mass_error(&traj).ok() } else { None };
    Ok(RunResult {
        config: config.clone(),
        trajectory: traj,
        completed,
        failure,
        failed_reports,
        attempted_steps: attempted,
        total_newton_iters: total_iters,
        errors: None,
        mass_error: mass,
        energy,
        wall_ms: started.elapsed().as_millis(),
    })
}

/// Fill `err_s` and `err_u` against a reference run when both runs completed
/// on the same time grid.
pub fn attach_errors(result: &mut RunResult, reference: &RunResult) -> Result<()> {
    if !result.completed || !reference.completed {
        return Ok(());
    }
    let (a, r) = (&result.trajectory, &reference.trajectory);
    let err_s = match linf_l1_error(a, r, Field::Saturation) {
        Ok(e) => e,
        Err(Error::Incompatible(_)) => return Ok(()),
        Err(e) => return Err(e),
    };
    let err_u = linf_l1_error(a, r, Field::Kirchhoff)?;
    result.errors = Some(RunErrors { err_s, err_u });
    Ok(())
}

/// Build the mesh, run, and compare with the reference run when configured.
pub fn run(config: &RunConfig) -> Result<RunResult> {
    run_observed(config, |_, _, _| {})
}

pub fn run_observed(
    config: &RunConfig,
    observe: impl FnMut(usize, &StepProblem<'_>, &Iterate<'_>),
) -> Result<RunResult> {
    let mesh = Arc::new(build_mesh(config)?);
    let mut result = simulate(config, mesh.clone(), observe)?;
    if let Some(rc) = reference_config(config) {
        let same = RunConfig { reference_eps: None, snapshot_times: Vec::new(), output: None, ..config.clone() };
        let reference = if rc == same {
            result.clone()
        } else {
            simulate(&rc, mesh, |_, _, _| {})?
        };
        attach_errors(&mut result, &reference)?;
    }
    Ok(result)
}
