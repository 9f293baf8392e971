use std::fmt;

use super::{dot, norm, sub, EdgeKind, Mesh, Point};

/// Orthogonality tolerance (radians) when edge geometry is known.
pub const ANGLE_TOL: f64 = 1e-10;
/// Relative tolerance on derived lengths and transmissibilities.
pub const LENGTH_TOL: f64 = 1e-10;
/// Relative tolerance on the closed-surface and tiling identities.
pub const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Cell(usize),
    Edge(usize),
    Mesh,
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entity::Cell(i) => write!(f, "cell {i}"),
            Entity::Edge(i) => write!(f, "edge {i}"),
            Entity::Mesh => f.write_str("mesh"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NonPositiveVolume,
    CenterOutsideCell,
    NonPositiveMeasure,
    NonPositiveDistance,
    TransmissibilityMismatch,
    NonOrthogonal,
    BoundaryProjection,
    ClosedSurface,
    Tiling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub entity: Entity,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind, entity: Entity) -> bool {
        self.violations.iter().any(|v| v.kind == kind && v.entity == entity)
    }

    fn push(&mut self, entity: Entity, kind: ViolationKind, detail: String) {
        self.violations.push(Violation { entity, kind, detail });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {}: {:?}: {}", v.entity, v.kind, v.detail)?;
        }
        Ok(())
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Angle between `v` and the line orthogonal to the segment `seg`.
fn deviation_from_normal(v: Point, seg: [Point; 2]) -> f64 {
    let t = sub(seg[1], seg[0]);
    let s = (dot(v, t) / (norm(v) * norm(t))).clamp(-1.0, 1.0);
    s.asin().abs()
}

fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    if poly.len() == 2 {
        let (a, b) = (poly[0][0].min(poly[1][0]), poly[0][0].max(poly[1][0]));
        return p[0] > a && p[0] < b;
    }
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Check every admissibility invariant and list the violations.
pub fn validate_admissibility(mesh: &Mesh) -> ValidationReport {
    let mut report = ValidationReport::default();

    for c in &mesh.cells {
        if !(c.volume > 0.0) {
            report.push(Entity::Cell(c.id), ViolationKind::NonPositiveVolume, format!("volume {}", c.volume));
        }
        if c.vertices.len() >= 2 && !point_in_polygon(c.center, &c.vertices) {
            report.push(
                Entity::Cell(c.id),
                ViolationKind::CenterOutsideCell,
                format!("center {:?} outside its polygon", c.center),
            );
        }
    }

    for e in &mesh.edges {
        let id = Entity::Edge(e.id);
        if !(e.measure > 0.0) {
            report.push(id, ViolationKind::NonPositiveMeasure, format!("measure {}", e.measure));
        }
        let d = e.distance();
        let positive = match e.kind {
            EdgeKind::Interior { dist, .. } => dist[0] > 0.0 && dist[1] > 0.0,
            EdgeKind::Boundary { dist, .. } => dist > 0.0,
        };
        if !positive {
            report.push(id, ViolationKind::NonPositiveDistance, format!("distance {d}"));
        }
        let expected = e.measure / d;
        if !(e.transmissibility > 0.0) || !rel_close(e.transmissibility, expected, LENGTH_TOL) {
            report.push(
                id,
                ViolationKind::TransmissibilityMismatch,
                format!("A = {} but m/d = {}", e.transmissibility, expected),
            );
        }
        match e.kind {
            EdgeKind::Interior { cells: [k, l], .. } => {
                let seg = sub(mesh.cells[l].center, mesh.cells[k].center);
                let len = norm(seg);
                if !rel_close(len, d, LENGTH_TOL) {
                    report.push(
                        id,
                        ViolationKind::NonOrthogonal,
                        format!("|x_K - x_L| = {len} differs from d_K + d_L = {d}"),
                    );
                } else if let Some(ends) = e.endpoints {
                    let angle = deviation_from_normal(seg, ends);
                    if angle > ANGLE_TOL {
                        report.push(id, ViolationKind::NonOrthogonal, format!("center segment off normal by {angle:e} rad"));
                    }
                }
            }
            EdgeKind::Boundary { cell, point, .. } => {
                let v = sub(point, mesh.cells[cell].center);
                let len = norm(v);
                if !rel_close(len, d, LENGTH_TOL) {
                    report.push(
                        id,
                        ViolationKind::BoundaryProjection,
                        format!("|x_sigma - x_K| = {len} differs from d = {d}"),
                    );
                } else if let Some(ends) = e.endpoints {
                    let angle = deviation_from_normal(v, ends);
                    let off_line = dot(sub(point, ends[0]), e.normal).abs();
                    if angle > ANGLE_TOL || off_line > LENGTH_TOL * d {
                        report.push(
                            id,
                            ViolationKind::BoundaryProjection,
                            format!("x_sigma is not the orthogonal projection (angle {angle:e}, offset {off_line:e})"),
                        );
                    }
                }
            }
        }
    }

    // sum_sigma m_sigma n_{K,sigma} = 0 for every cell
    for c in &mesh.cells {
        let mut acc = [0.0; 2];
        let mut scale = 0.0;
        for &ei in &c.edges {
            let e = &mesh.edges[ei];
            let n = e.normal_from(c.id);
            acc[0] += e.measure * n[0];
            acc[1] += e.measure * n[1];
            scale += e.measure;
        }
        if norm(acc) > SUM_TOL * scale {
            report.push(
                Entity::Cell(c.id),
                ViolationKind::ClosedSurface,
                format!("sum m_sigma n_K,sigma = {acc:?}"),
            );
        }
    }

    // divergence theorem: d |Omega| = sum_{boundary} m_sigma x_sigma . n_sigma
    let from_boundary: f64 = mesh
        .edges
        .iter()
        .filter_map(|e| match e.kind {
            EdgeKind::Boundary { point, .. } => Some(e.measure * dot(point, e.normal)),
            EdgeKind::Interior { .. } => None,
        })
        .sum::<f64>()
        / mesh.dim as f64;
    let total = mesh.measure();
    if !mesh.cells.is_empty() && !rel_close(total, from_boundary, SUM_TOL.max(1e-12)) {
        report.push(
            Entity::Mesh,
            ViolationKind::Tiling,
            format!("sum of cell volumes {total} differs from enclosed measure {from_boundary}"),
        );
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rect_mesh, BoundingBox};

    #[test]
    fn rect_meshes_are_admissible() {
        for (nx, ny) in [(1, 1), (2, 1), (3, 7), (20, 20), (39, 39)] {
            let m = build_rect_mesh(nx, ny, BoundingBox::new([-0.5, 0.0], [1.5, 3.0])).unwrap();
            let r = validate_admissibility(&m);
            assert!(r.is_empty(), "{nx}x{ny}: {r}");
        }
    }

    #[test]
    fn corrupted_transmissibility_is_reported() {
        let mut m = build_rect_mesh(4, 4, BoundingBox::unit_square()).unwrap();
        m.edges[5].transmissibility *= 1.01;
        let r = validate_admissibility(&m);
        assert!(r.has(ViolationKind::TransmissibilityMismatch, Entity::Edge(5)));
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn gravity_balance_per_cell() {
        let m = build_rect_mesh(20, 20, BoundingBox::unit_square()).unwrap();
        let g = [0.0, -1.0];
        for c in &m.cells {
            let s: f64 = c.edges.iter().map(|&e| m.edges[e].measure * dot(g, m.edges[e].normal_from(c.id))).sum();
            assert!(s.abs() <= 1e-12, "cell {}: {s}", c.id);
        }
    }

    #[test]
    fn shifted_center_is_non_orthogonal() {
        let mut m = build_rect_mesh(2, 2, BoundingBox::unit_square()).unwrap();
        m.cells[0].center[1] += 0.01;
        let r = validate_admissibility(&m);
        assert!(r.violations.iter().any(|v| v.kind == ViolationKind::NonOrthogonal));
    }
}
