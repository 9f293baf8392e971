//! Parameter sweeps: one reference run per beta, then the cross product of
//! beta, eps and formulation, each compared with its beta's reference.

use std::sync::Arc;

use rayon::prelude::*;

use super::config::{RunConfig, SweepSpec};
use super::output::summary_csv;
use super::run::{attach_errors, build_mesh, reference_config, simulate, RunResult};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub config: RunConfig,
    /// `Err` holds the message of a run that could not be carried out.
    /// Newton failures are `Ok` results with `completed == false`.
    pub outcome: std::result::Result<RunResult, String>,
}

impl SweepRow {
    pub fn result(&self) -> Option<&RunResult> {
        self.outcome.as_ref().ok()
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub base: RunConfig,
    /// Per beta, in the order of the spec.
    pub references: Vec<(f64, std::result::Result<RunResult, String>)>,
    /// Beta-major, then eps, then formulation.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn find(&self, beta: f64, eps: f64, formulation: crate::hydro::Formulation) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.config.beta == beta && r.config.eps == eps && r.config.formulation == formulation)
    }

    pub fn summary_csv(&self) -> String {
        let rows: Vec<_> = self.rows.iter().map(|r| (r.config.clone(), r.result())).collect();
        summary_csv(&self.base, &rows)
    }
}

fn attempt(config: &RunConfig) -> std::result::Result<RunResult, String> {
    let mesh = Arc::new(build_mesh(config).map_err(|e| e.to_string())?);
    simulate(config, mesh, |_, _, _| {}).map_err(|e| e.to_string())
}

/// Runs execute in parallel; each run is sequential and the result order
/// does not depend on scheduling.
pub fn sweep(base: &RunConfig, spec: &SweepSpec) -> Result<SweepResult> {
    base.validate()?;
    let references: Vec<(f64, std::result::Result<RunResult, String>)> = spec
        .betas
        .par_iter()
        .map(|&beta| {
            let cfg = RunConfig { beta, ..base.clone() };
            let outcome = match reference_config(&cfg) {
                Some(rc) => attempt(&rc),
                None => Err("no reference tolerance configured".into()),
            };
            (beta, outcome)
        })
        .collect();

    let mut configs = Vec::new();
    for &beta in &spec.betas {
        for &eps in &spec.eps {
            for &formulation in &spec.formulations {
                configs.push(RunConfig { beta, eps, formulation, snapshot_times: Vec::new(), output: None, ..base.clone() });
            }
        }
    }
    let rows: Vec<SweepRow> = configs
        .into_par_iter()
        .map(|config| {
            let reference = references.iter().find(|(b, _)| *b == config.beta).and_then(|(_, r)| r.as_ref().ok());
            // a row is reused only when it is itself the reference run
            let own_reference = RunConfig { reference_eps: None, ..config.clone() };
            let reused = reference.filter(|r| r.config == own_reference && reference_config(&config).as_ref() == Some(&r.config));
            let outcome = match reused {
                Some(r) => Ok(RunResult { config: config.clone(), ..r.clone() }),
                None => attempt(&config),
            };
            let outcome = outcome.and_then(|mut res| {
                if let Some(r) = reference {
                    attach_errors(&mut res, r).map_err(|e| e.to_string())?;
                }
                Ok(res)
            });
            SweepRow { config, outcome }
        })
        .collect();
    Ok(SweepResult { base: base.clone(), references, rows })
}
