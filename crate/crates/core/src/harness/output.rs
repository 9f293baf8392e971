//! CSV summaries, residual histories and legacy VTK snapshots.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::RunConfig;
use super::run::{model_of, RunResult};
use crate::diagnostics::{Field, Trajectory};
use crate::error::Result;
use crate::mesh::Mesh;

pub const SUMMARY_HEADER: &str = "case,formulation,beta,p_b,eta_mode,eps,mesh,dt,steps,\
mean_newton_iters,total_newton_iters,err_s,err_u,mass_err,converged,wall_ms";
pub const RESIDUALS_HEADER: &str = "step,iter,residual";

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// `#`-prefixed lines with the resolved configuration and its derived
/// Brooks-Corey constants.
pub fn config_echo(config: &RunConfig) -> String {
    let mut out = String::new();
    for line in config.to_toml().lines() {
        let _ = writeln!(out, "# {line}");
    }
    if let Ok(model) = model_of(config) {
        let d = model.derive_params();
        let _ = writeln!(
            out,
            "# derived: eta = {}, u_b = {}, tau_star = {}, tau_sat = {}",
            fmt_float(d.eta),
            fmt_float(d.u_b),
            fmt_float(d.tau_star),
            fmt_float(d.tau_sat)
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One summary row. `result` is `None` when the run could not start.
pub fn summary_row(config: &RunConfig, result: Option<&RunResult>) -> String {
    let mut cols = vec![
        config.case.to_string(),
        config.formulation.to_string(),
        fmt_float(config.beta),
        fmt_float(config.p_b),
        config.eta_mode.to_string(),
        fmt_float(config.eps),
        csv_field(&config.mesh.to_string()),
        fmt_float(config.dt),
    ];
    match result {
        Some(r) => {
            let errors = r.errors;
            cols.extend([
                r.trajectory.steps().to_string(),
                fmt_float(r.mean_newton_iters()),
                r.total_newton_iters.to_string(),
                opt_float(errors.map(|e| e.err_s)),
                opt_float(errors.map(|e| e.err_u)),
                opt_float(r.mass_error),
                r.completed.to_string(),
                r.wall_ms.to_string(),
            ]);
        }
        None => cols.extend(["0", "", "", "", "", "", "false", ""].map(String::from)),
    }
    cols.join(",")
}

/// Summary CSV text: configuration echo, header, one row per entry.
pub fn summary_csv(echo: &RunConfig, rows: &[(RunConfig, Option<&RunResult>)]) -> String {
    let mut out = config_echo(echo);
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for (c, r) in rows {
        out.push_str(&summary_row(c, *r));
        out.push('\n');
    }
    out
}

/// Residual histories of the accepted steps, `iter` counting from the
/// initial guess.
pub fn residuals_csv(result: &RunResult) -> String {
    let mut out = config_echo(&result.config);
    out.push_str(RESIDUALS_HEADER);
    out.push('\n');
    for (n, rep) in result.trajectory.reports.iter().enumerate() {
        for (k, r) in rep.residual_history.iter().enumerate() {
            let _ = writeln!(out, "{},{k},{}", n + 1, fmt_float(*r));
        }
    }
    out
}

/// Time levels closest to each requested time, without repeats.
pub fn snapshot_levels(traj: &Trajectory, times: &[f64]) -> Vec<usize> {
    let mut levels = Vec::new();
    for &t in times {
        let nearest = traj
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(n, _)| n);
        if let Some(n) = nearest {
            if !levels.contains(&n) {
                levels.push(n);
            }
        }
    }
    levels
}

const VTK_VERTEX: u8 = 1;
const VTK_LINE: u8 = 3;
const VTK_POLYGON: u8 = 7;
const VTK_QUAD: u8 = 9;

/// Legacy ASCII VTK unstructured grid with the cell fields `saturation` and
/// `kirchhoff_u`. Cells without stored geometry are written as vertices at
/// their centres.
pub fn vtk_snapshot(mesh: &Mesh, title: &str, saturation: &[f64], kirchhoff: &[f64]) -> String {
    let mut points: Vec<[f64; 2]> = Vec::new();
    let mut index: HashMap<[u64; 2], usize> = HashMap::new();
    let mut cells: Vec<(u8, Vec<usize>)> = Vec::with_capacity(mesh.num_cells());
    let mut add = |p: [f64; 2]| -> usize {
        *index.entry([p[0].to_bits(), p[1].to_bits()]).or_insert_with(|| {
            points.push(p);
            points.len() - 1
        })
    };
    for c in &mesh.cells {
        let ids: Vec<usize> = if c.vertices.is_empty() { vec![add(c.center)] } else { c.vertices.iter().map(|&v| add(v)).collect() };
        let kind = match ids.len() {
            1 => VTK_VERTEX,
            2 => VTK_LINE,
            4 => VTK_QUAD,
            _ => VTK_POLYGON,
        };
        cells.push((kind, ids));
    }

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "{}", title.replace('\n', " "));
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", points.len());
    for p in &points {
        let _ = writeln!(out, "{} {} 0", fmt_float(p[0]), fmt_float(p[1]));
    }
    let size: usize = cells.iter().map(|(_, ids)| ids.len() + 1).sum();
    let _ = writeln!(out, "CELLS {} {size}", cells.len());
    for (_, ids) in &cells {
        let list: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{} {}", ids.len(), list.join(" "));
    }
    let _ = writeln!(out, "CELL_TYPES {}", cells.len());
    for (kind, _) in &cells {
        let _ = writeln!(out, "{kind}");
    }
    let _ = writeln!(out, "CELL_DATA {}", cells.len());
    for (name, values) in [("saturation", saturation), ("kirchhoff_u", kirchhoff)] {
        let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in values {
            let _ = writeln!(out, "{}", fmt_float(*v));
        }
    }
    out
}

/// Write `summary.csv`, `residuals.csv` and one VTK file per snapshot time
/// into `dir`. Returns the written paths.
pub fn write_outputs(result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let summary = dir.join("summary.csv");
    fs::write(&summary, summary_csv(&result.config, &[(result.config.clone(), Some(result))]))?;
    written.push(summary);
    let residuals = dir.join("residuals.csv");
    fs::write(&residuals, residuals_csv(result))?;
    written.push(residuals);

    let traj = &result.trajectory;
    for n in snapshot_levels(traj, &result.config.snapshot_times) {
        let t = traj.times[n];
        let path = dir.join(format!("snapshot_{n:04}.vtk"));
        let title = format!("{} {} beta={} t={}", result.config.case, result.config.formulation, result.config.beta, t);
        let text = vtk_snapshot(&traj.mesh, &title, &traj.field(n, Field::Saturation), &traj.field(n, Field::Kirchhoff));
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
