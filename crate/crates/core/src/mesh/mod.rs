//! Admissible two-point-flux meshes.
//!
//! A mesh is a list of cells (volume, center) and a list of edges (measure,
//! incident cells, center-to-edge distances). Interior edges join two cells
//! whose centers lie on the same normal line through the edge; boundary edges
//! carry the orthogonal projection `x_sigma` of their cell center and a
//! boundary tag. Transmissibilities `A = m_sigma / d_sigma` and unit normals
//! are derived once at construction.

mod io;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_mesh, parse_mesh, write_mesh};
pub use validate::{validate_admissibility, Entity, ValidationReport, Violation, ViolationKind};

/// A point of the plane. One-dimensional meshes use `[x, 0.0]`.
pub type Point = [f64; 2];

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn new(min: Point, max: Point) -> Self {
        BoundingBox { min, max }
    }

    pub fn unit_square() -> Self {
        BoundingBox::new([0.0, 0.0], [1.0, 1.0])
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    Dirichlet,
    NoFlux,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryTag::Dirichlet => f.write_str("dirichlet"),
            BoundaryTag::NoFlux => f.write_str("noflux"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: usize,
    pub volume: f64,
    pub center: Point,
    pub edges: Vec<usize>,
    /// Polygon vertices (counter-clockwise) when the geometry is known.
    /// Empty for meshes loaded from file.
    pub vertices: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeKind {
    Interior {
        cells: [usize; 2],
        /// Distances `d_{K,sigma}`, `d_{L,sigma}` from each center to the edge.
        dist: [f64; 2],
    },
    Boundary {
        cell: usize,
        dist: f64,
        point: Point,
        tag: BoundaryTag,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: usize,
    pub measure: f64,
    pub kind: EdgeKind,
    pub transmissibility: f64,
    /// Unit normal pointing out of the first incident cell.
    pub normal: Point,
    /// Segment end points when the geometry is known (2D built meshes).
    pub endpoints: Option<[Point; 2]>,
}

impl Edge {
    /// `d_sigma` for interior edges, `d_{K,sigma}` for boundary edges.
    pub fn distance(&self) -> f64 {
        match self.kind {
            EdgeKind::Interior { dist, .. } => dist[0] + dist[1],
            EdgeKind::Boundary { dist, .. } => dist,
        }
    }

    pub fn is_interior(&self) -> bool {
        matches!(self.kind, EdgeKind::Interior { .. })
    }

    pub fn boundary_tag(&self) -> Option<BoundaryTag> {
        match self.kind {
            EdgeKind::Boundary { tag, .. } => Some(tag),
            EdgeKind::Interior { .. } => None,
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        self.boundary_tag() == Some(BoundaryTag::Dirichlet)
    }

    /// The neighbour across the edge, seen from `cell`.
    pub fn neighbour(&self, cell: usize) -> Option<usize> {
        match self.kind {
            EdgeKind::Interior { cells, .. } if cells[0] == cell => Some(cells[1]),
            EdgeKind::Interior { cells, .. } if cells[1] == cell => Some(cells[0]),
            _ => None,
        }
    }

    /// Outward unit normal `n_{K,sigma}` w.r.t. `cell`.
    pub fn normal_from(&self, cell: usize) -> Point {
        match self.kind {
            EdgeKind::Interior { cells, .. } if cells[1] == cell => [-self.normal[0], -self.normal[1]],
            _ => self.normal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub cells: Vec<Cell>,
    pub edges: Vec<Edge>,
    pub bbox: BoundingBox,
}

impl Mesh {
    /// Assemble a mesh from raw cells and edges, deriving transmissibilities,
    /// normals and the per-cell edge lists. Does not validate.
    pub fn from_parts(dim: usize, mut cells: Vec<Cell>, mut edges: Vec<Edge>) -> Result<Mesh> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("unsupported mesh dimension {dim}")));
        }
        for (i, c) in cells.iter_mut().enumerate() {
            if c.id != i {
                return Err(Error::Config(format!("cell ids must be 0..n in order, found {} at {i}", c.id)));
            }
            c.edges.clear();
        }
        for (i, e) in edges.iter_mut().enumerate() {
            if e.id != i {
                return Err(Error::Config(format!("edge ids must be 0..m in order, found {} at {i}", e.id)));
            }
            let n = cells.len();
            let (from, towards) = match e.kind {
                EdgeKind::Interior { cells: [k, l], .. } => {
                    if k >= n || l >= n || k == l {
                        return Err(Error::Config(format!("edge {i} references invalid cells {k}, {l}")));
                    }
                    (cells[k].center, cells[l].center)
                }
                EdgeKind::Boundary { cell, point, .. } => {
                    if cell >= n {
                        return Err(Error::Config(format!("edge {i} references invalid cell {cell}")));
                    }
                    (cells[cell].center, point)
                }
            };
            let d = sub(towards, from);
            let len = norm(d);
            e.normal = if len > 0.0 { [d[0] / len, d[1] / len] } else { [0.0, 0.0] };
            e.transmissibility = e.measure / e.distance();
            match e.kind {
                EdgeKind::Interior { cells: [k, l], .. } => {
                    cells[k].edges.push(i);
                    cells[l].edges.push(i);
                }
                EdgeKind::Boundary { cell, .. } => cells[cell].edges.push(i),
            }
        }
        let bbox = bounding_box(&cells, &edges);
        Ok(Mesh { dim, cells, edges, bbox })
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn measure(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.is_interior())
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| !e.is_interior())
    }

    pub fn dirichlet_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.is_dirichlet())
    }

    pub fn has_dirichlet(&self) -> bool {
        self.dirichlet_edges().next().is_some()
    }

    /// Retag every boundary edge: `pick(edge_point, outward_normal)` returns
    /// the new tag.
    pub fn retag_boundary(&mut self, mut pick: impl FnMut(Point, Point) -> BoundaryTag) {
        for e in &mut self.edges {
            let normal = e.normal;
            if let EdgeKind::Boundary { point, ref mut tag, .. } = e.kind {
                *tag = pick(point, normal);
            }
        }
    }

    /// Whether every cell has the same volume (to 1e-12 relative).
    pub fn has_uniform_volumes(&self) -> bool {
        let Some(first) = self.cells.first() else { return true };
        self.cells
            .iter()
            .all(|c| (c.volume - first.volume).abs() <= 1e-12 * first.volume)
    }
}

fn bounding_box(cells: &[Cell], edges: &[Edge]) -> BoundingBox {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    let mut grow = |p: Point| {
        for k in 0..2 {
            min[k] = min[k].min(p[k]);
            max[k] = max[k].max(p[k]);
        }
    };
    for c in cells {
        grow(c.center);
        c.vertices.iter().copied().for_each(&mut grow);
    }
    for e in edges {
        if let EdgeKind::Boundary { point, .. } = e.kind {
            grow(point);
        }
    }
    if cells.is_empty() {
        return BoundingBox::new([0.0; 2], [0.0; 2]);
    }
    BoundingBox::new(min, max)
}

/// Uniform `nx` by `ny` rectangular grid of `domain`. Every boundary edge is
/// tagged [`BoundaryTag::NoFlux`]. Cells are numbered row by row, `x1` fastest.
pub fn build_rect_mesh(nx: usize, ny: usize, domain: BoundingBox) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::Config(format!("grid size must be positive, got {nx}x{ny}")));
    }
    let (w, h) = (domain.width(), domain.height());
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(Error::Config(format!("degenerate domain {domain:?}")));
    }
    let hx = w / nx as f64;
    let hy = h / ny as f64;
    let x = |i: usize| if i == nx { domain.max[0] } else { domain.min[0] + i as f64 * hx };
    let y = |j: usize| if j == ny { domain.max[1] } else { domain.min[1] + j as f64 * hy };
    let cell_id = |i: usize, j: usize| j * nx + i;

    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (x0, x1, y0, y1) = (x(i), x(i + 1), y(j), y(j + 1));
            cells.push(Cell {
                id: cell_id(i, j),
                volume: (x1 - x0) * (y1 - y0),
                center: [0.5 * (x0 + x1), 0.5 * (y0 + y1)],
                edges: Vec::new(),
                vertices: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
            });
        }
    }

    let mut edges = Vec::new();
    let mut push = |measure: f64, kind: EdgeKind, endpoints: [Point; 2]| {
        let id = edges.len();
        edges.push(Edge {
            id,
            measure,
            kind,
            transmissibility: 0.0,
            normal: [0.0, 0.0],
            endpoints: Some(endpoints),
        });
    };
    let center = |i: usize, j: usize| cells[cell_id(i, j)].center;

    // vertical interior edges
    for j in 0..ny {
        for i in 0..nx.saturating_sub(1) {
            let xe = x(i + 1);
            let (ck, cl) = (center(i, j), center(i + 1, j));
            push(
                y(j + 1) - y(j),
                EdgeKind::Interior { cells: [cell_id(i, j), cell_id(i + 1, j)], dist: [xe - ck[0], cl[0] - xe] },
                [[xe, y(j)], [xe, y(j + 1)]],
            );
        }
    }
    // horizontal interior edges
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx {
            let ye = y(j + 1);
            let (ck, cl) = (center(i, j), center(i, j + 1));
            push(
                x(i + 1) - x(i),
                EdgeKind::Interior { cells: [cell_id(i, j), cell_id(i, j + 1)], dist: [ye - ck[1], cl[1] - ye] },
                [[x(i), ye], [x(i + 1), ye]],
            );
        }
    }
    let boundary = |cell: usize, dist: f64, point: Point| EdgeKind::Boundary {
        cell,
        dist,
        point,
        tag: BoundaryTag::NoFlux,
    };
    // bottom, top, left, right
    for i in 0..nx {
        let c = center(i, 0);
        let p = [c[0], y(0)];
        push(x(i + 1) - x(i), boundary(cell_id(i, 0), c[1] - p[1], p), [[x(i), y(0)], [x(i + 1), y(0)]]);
    }
    for i in 0..nx {
        let c = center(i, ny - 1);
        let p = [c[0], y(ny)];
        push(x(i + 1) - x(i), boundary(cell_id(i, ny - 1), p[1] - c[1], p), [[x(i), y(ny)], [x(i + 1), y(ny)]]);
    }
    for j in 0..ny {
        let c = center(0, j);
        let p = [x(0), c[1]];
        push(y(j + 1) - y(j), boundary(cell_id(0, j), c[0] - p[0], p), [[x(0), y(j)], [x(0), y(j + 1)]]);
    }
    for j in 0..ny {
        let c = center(nx - 1, j);
        let p = [x(nx), c[1]];
        push(y(j + 1) - y(j), boundary(cell_id(nx - 1, j), p[0] - c[0], p), [[x(nx), y(j)], [x(nx), y(j + 1)]]);
    }

    let mut mesh = Mesh::from_parts(2, cells, edges)?;
    mesh.bbox = domain;
    Ok(mesh)
}

/// Uniform 1D mesh of `[a, b]` with `n` cells. Edges are points with unit measure.
pub fn build_line_mesh(n: usize, a: f64, b: f64) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Config("line mesh needs at least one cell".into()));
    }
    if !(b > a) || !(b - a).is_finite() {
        return Err(Error::Config(format!("degenerate interval [{a}, {b}]")));
    }
    let h = (b - a) / n as f64;
    let node = |i: usize| if i == n { b } else { a + i as f64 * h };
    let cells: Vec<Cell> = (0..n)
        .map(|i| {
            let (x0, x1) = (node(i), node(i + 1));
            Cell {
                id: i,
                volume: x1 - x0,
                center: [0.5 * (x0 + x1), 0.0],
                edges: Vec::new(),
                vertices: vec![[x0, 0.0], [x1, 0.0]],
            }
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n - 1 {
        let xe = node(i + 1);
        edges.push(Edge {
            id: edges.len(),
            measure: 1.0,
            kind: EdgeKind::Interior {
                cells: [i, i + 1],
                dist: [xe - cells[i].center[0], cells[i + 1].center[0] - xe],
            },
            transmissibility: 0.0,
            normal: [0.0; 2],
            endpoints: None,
        });
    }
    for (cell, x) in [(0, a), (n - 1, b)] {
        edges.push(Edge {
            id: edges.len(),
            measure: 1.0,
            kind: EdgeKind::Boundary {
                cell,
                dist: (cells[cell].center[0] - x).abs(),
                point: [x, 0.0],
                tag: BoundaryTag::NoFlux,
            },
            transmissibility: 0.0,
            normal: [0.0; 2],
            endpoints: None,
        });
    }
    let mut mesh = Mesh::from_parts(1, cells, edges)?;
    mesh.bbox = BoundingBox::new([a, 0.0], [b, 0.0]);
    Ok(mesh)
}

/// Values attached to the cells and to the edges of a mesh. Edge values are
/// only read on Dirichlet boundary edges.
#[derive(Debug, Clone, PartialEq)]
pub struct CellEdgeValues {
    pub cells: Vec<f64>,
    pub edges: Vec<f64>,
}

impl CellEdgeValues {
    /// Sample `f` at the cell centers and at the boundary edge points.
    pub fn sample(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Self {
        let cells = mesh.cells.iter().map(|c| f(c.center)).collect();
        let edges = mesh
            .edges
            .iter()
            .map(|e| match e.kind {
                EdgeKind::Boundary { point, .. } => f(point),
                EdgeKind::Interior { .. } => 0.0,
            })
            .collect();
        CellEdgeValues { cells, edges }
    }

    fn check(&self, mesh: &Mesh) -> Result<()> {
        if self.cells.len() != mesh.num_cells() {
            return Err(Error::SizeMismatch { what: "cell values", expected: mesh.num_cells(), got: self.cells.len() });
        }
        if self.edges.len() != mesh.num_edges() {
            return Err(Error::SizeMismatch { what: "edge values", expected: mesh.num_edges(), got: self.edges.len() });
        }
        Ok(())
    }
}

/// Discrete H1 bilinear form of two-point finite volumes:
/// `sum_{K|L} A (v_K - v_L)(w_K - w_L) + sum_{Dirichlet sigma} A (v_K - v_sigma)(w_K - w_sigma)`.
pub fn discrete_h1_inner(mesh: &Mesh, v: &CellEdgeValues, w: &CellEdgeValues) -> Result<f64> {
    v.check(mesh)?;
    w.check(mesh)?;
    let mut acc = 0.0;
    for e in &mesh.edges {
        match e.kind {
            EdgeKind::Interior { cells: [k, l], .. } => {
                acc += e.transmissibility * (v.cells[k] - v.cells[l]) * (w.cells[k] - w.cells[l]);
            }
            EdgeKind::Boundary { cell, tag: BoundaryTag::Dirichlet, .. } => {
                acc += e.transmissibility * (v.cells[cell] - v.edges[e.id]) * (w.cells[cell] - w.edges[e.id]);
            }
            EdgeKind::Boundary { .. } => {}
        }
    }
    Ok(acc)
}
