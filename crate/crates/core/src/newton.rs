//! Plain Newton iteration for one implicit step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::{jacobian, residual, StepProblem};
use crate::sparse::{linear_solve, CsrMatrix};

pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Stop when `sum_K |f_K| <= tolerance * dt`.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl NewtonConfig {
    pub fn new(tolerance: f64, max_iter: usize) -> Result<Self> {
        if !(tolerance > 0.0) || !tolerance.is_finite() {
            return Err(Error::Config(format!("Newton tolerance must be positive, got {tolerance}")));
        }
        if max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(NewtonConfig { tolerance, max_iter })
    }
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tolerance: 1e-6, max_iter: DEFAULT_MAX_ITER }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NewtonReport {
    pub iterations: usize,
    /// `|F(tau^k)|_1` for `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub final_residual: f64,
}

/// What an observer sees at every iterate where a Jacobian was assembled.
pub struct Iterate<'a> {
    pub k: usize,
    pub tau: &'a [f64],
    pub residual: &'a [f64],
    pub jacobian: &'a CsrMatrix,
}

fn norm_1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn newton_solve(problem: &StepProblem<'_>, tau_init: &[f64], config: &NewtonConfig) -> Result<(Vec<f64>, NewtonReport)> {
    newton_solve_observed(problem, tau_init, config, |_| {})
}

/// Newton from `tau_init` with the residual stopping rule. Running out of
/// iterations or reaching a non-finite residual gives a report with
/// `converged = false`; a failed linear solve is an error.
pub fn newton_solve_observed(
    problem: &StepProblem<'_>,
    tau_init: &[f64],
    config: &NewtonConfig,
    mut observe: impl FnMut(&Iterate<'_>),
) -> Result<(Vec<f64>, NewtonReport)> {
    let threshold = config.tolerance * problem.dt;
    let mut tau = tau_init.to_vec();
    let mut report = NewtonReport::default();
    let mut f = residual(problem, &tau)?;
    loop {
        let r = norm_1(&f);
        report.residual_history.push(r);
        report.final_residual = r;
        if r <= threshold {
            report.converged = true;
            return Ok((tau, report));
        }
        if !r.is_finite() || report.iterations == config.max_iter {
            return Ok((tau, report));
        }
        let j = jacobian(problem, &tau)?;
        observe(&Iterate { k: report.iterations, tau: &tau, residual: &f, jacobian: &j });
        let step = linear_solve(&j, &f).map_err(|e| Error::NewtonBreakdown {
            iteration: report.iterations,
            reason: e.to_string(),
            tau_inf: tau.iter().fold(0.0, |m: f64, t| m.max(t.abs())),
        })?;
        for (t, d) in tau.iter_mut().zip(&step) {
            *t -= d;
        }
        report.iterations += 1;
        f = residual(problem, &tau)?;
    }
}
