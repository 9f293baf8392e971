//! Line-oriented ASCII mesh format.
//!
//! ```text
//! mesh d=<1|2> ncells=<n> nedges=<m>
//! cell <id> <volume> <center coords...>
//! edge <id> <measure> interior <K> <L> <dK> <dL>
//! edge <id> <measure> boundary <K> <dK> <xsigma coords...> <dirichlet|noflux>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{validate_admissibility, BoundaryTag, Cell, Edge, EdgeKind, Mesh, Point};
use crate::error::{Error, Result};

struct Lines<'a> {
    path: PathBuf,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Some((i + 1, line.split_whitespace().collect()));
        }
        None
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse { path: self.path.clone(), line, message: message.into() }
    }
}

fn num<T: std::str::FromStr>(lines: &Lines<'_>, line: usize, tok: Option<&&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| lines.err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| lines.err(line, format!("invalid {what} `{tok}`")))
}

fn header_field(lines: &Lines<'_>, line: usize, tok: Option<&&str>, key: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| lines.err(line, format!("missing `{key}=` in header")))?;
    let val = tok
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| lines.err(line, format!("expected `{key}=<n>`, got `{tok}`")))?;
    val.parse().map_err(|_| lines.err(line, format!("invalid {key} `{val}`")))
}

/// Parse a mesh from text. `origin` is only used in error messages.
/// The result is validated; an inadmissible mesh is an error.
pub fn parse_mesh(text: &str, origin: &Path) -> Result<Mesh> {
    let mut lines = Lines { path: origin.to_path_buf(), inner: text.lines().enumerate() };
    let (hl, header) = lines.next_tokens().ok_or_else(|| lines.err(1, "empty mesh file"))?;
    if header.first() != Some(&"mesh") {
        return Err(lines.err(hl, "expected header `mesh d=.. ncells=.. nedges=..`"));
    }
    let dim = header_field(&lines, hl, header.get(1), "d")?;
    if dim != 1 && dim != 2 {
        return Err(lines.err(hl, format!("dimension must be 1 or 2, got {dim}")));
    }
    let ncells = header_field(&lines, hl, header.get(2), "ncells")?;
    let nedges = header_field(&lines, hl, header.get(3), "nedges")?;

    let point = |lines: &Lines<'_>, line: usize, toks: &[&str]| -> Result<Point> {
        let mut p = [0.0; 2];
        for (k, slot) in p.iter_mut().enumerate().take(dim) {
            *slot = num(lines, line, toks.get(k), "coordinate")?;
        }
        Ok(p)
    };

    let mut cells = Vec::with_capacity(ncells);
    for expected in 0..ncells {
        let (l, t) = lines.next_tokens().ok_or_else(|| lines.err(0, format!("expected {ncells} cells")))?;
        if t.first() != Some(&"cell") {
            return Err(lines.err(l, "expected `cell` line"));
        }
        let id: usize = num(&lines, l, t.get(1), "cell id")?;
        if id != expected {
            return Err(lines.err(l, format!("cell ids must be consecutive, expected {expected}")));
        }
        let volume = num(&lines, l, t.get(2), "volume")?;
        if t.len() != 3 + dim {
            return Err(lines.err(l, format!("cell line needs {dim} center coordinates")));
        }
        let center = point(&lines, l, &t[3..])?;
        cells.push(Cell { id, volume, center, edges: Vec::new(), vertices: Vec::new() });
    }

    let mut edges = Vec::with_capacity(nedges);
    for expected in 0..nedges {
        let (l, t) = lines.next_tokens().ok_or_else(|| lines.err(0, format!("expected {nedges} edges")))?;
        if t.first() != Some(&"edge") {
            return Err(lines.err(l, "expected `edge` line"));
        }
        let id: usize = num(&lines, l, t.get(1), "edge id")?;
        if id != expected {
            return Err(lines.err(l, format!("edge ids must be consecutive, expected {expected}")));
        }
        let measure: f64 = num(&lines, l, t.get(2), "measure")?;
        let kind = match t.get(3).copied() {
            Some("interior") => {
                if t.len() != 8 {
                    return Err(lines.err(l, "interior edge needs `<K> <L> <dK> <dL>`"));
                }
                let k: usize = num(&lines, l, t.get(4), "cell K")?;
                let c: usize = num(&lines, l, t.get(5), "cell L")?;
                let dk = num(&lines, l, t.get(6), "dK")?;
                let dl = num(&lines, l, t.get(7), "dL")?;
                EdgeKind::Interior { cells: [k, c], dist: [dk, dl] }
            }
            Some("boundary") => {
                if t.len() != 7 + dim {
                    return Err(lines.err(l, format!("boundary edge needs `<K> <dK> <{dim} coords> <tag>`")));
                }
                let cell = num(&lines, l, t.get(4), "cell K")?;
                let dist = num(&lines, l, t.get(5), "dK")?;
                let p = point(&lines, l, &t[6..6 + dim])?;
                let tag = match t[6 + dim] {
                    "dirichlet" => BoundaryTag::Dirichlet,
                    "noflux" => BoundaryTag::NoFlux,
                    other => return Err(lines.err(l, format!("unknown boundary tag `{other}`"))),
                };
                EdgeKind::Boundary { cell, dist, point: p, tag }
            }
            other => return Err(lines.err(l, format!("expected `interior` or `boundary`, got {other:?}"))),
        };
        edges.push(Edge { id, measure, kind, transmissibility: 0.0, normal: [0.0; 2], endpoints: None });
    }
    if let Some((l, _)) = lines.next_tokens() {
        return Err(lines.err(l, "trailing content after the last edge"));
    }

    let mesh = Mesh::from_parts(dim, cells, edges).map_err(|e| match e {
        Error::Config(msg) => lines.err(0, msg),
        other => other,
    })?;
    let report = validate_admissibility(&mesh);
    if !report.is_empty() {
        return Err(Error::InadmissibleMesh(report));
    }
    Ok(mesh)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text, path)
}

/// Serialize a mesh in the text format. Polygon vertices and edge end points
/// are not part of the format and are dropped.
pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let coords = |p: Point| -> String {
        p[..mesh.dim].iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(out, "mesh d={} ncells={} nedges={}", mesh.dim, mesh.num_cells(), mesh.num_edges());
    for c in &mesh.cells {
        let _ = writeln!(out, "cell {} {:?} {}", c.id, c.volume, coords(c.center));
    }
    for e in &mesh.edges {
        match e.kind {
            EdgeKind::Interior { cells: [k, l], dist } => {
                let _ = writeln!(out, "edge {} {:?} interior {k} {l} {:?} {:?}", e.id, e.measure, dist[0], dist[1]);
            }
            EdgeKind::Boundary { cell, dist, point, tag } => {
                let _ = writeln!(out, "edge {} {:?} boundary {cell} {:?} {} {tag}", e.id, e.measure, dist, coords(point));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rect_mesh, BoundingBox, Entity, ViolationKind};

    const TWO_CELLS: &str = "\
# two Voronoi cells
mesh d=2 ncells=2 nedges=7
cell 0 0.5 0.25 0.5
cell 1 0.5 0.75 0.5
edge 0 1 interior 0 1 0.25 0.25
edge 1 0.5 boundary 0 0.5 0.25 0 noflux
edge 2 0.5 boundary 1 0.5 0.75 0 noflux
edge 3 0.5 boundary 0 0.5 0.25 1 dirichlet
edge 4 0.5 boundary 1 0.5 0.75 1 noflux
edge 5 1 boundary 0 0.25 0 0.5 noflux
edge 6 1 boundary 1 0.25 1 0.5 noflux
";

    #[test]
    fn two_cell_voronoi_pair() {
        let m = parse_mesh(TWO_CELLS, Path::new("two.mesh")).unwrap();
        assert_eq!(m.edges[0].transmissibility, 1.0 / 0.5);
        assert_eq!(m.edges[0].normal, [1.0, 0.0]);
        assert!(m.edges[3].is_dirichlet());
        assert_eq!(m.cells[0].edges, vec![0, 1, 3, 5]);
    }

    #[test]
    fn round_trip_single_cell() {
        let built = build_rect_mesh(1, 1, BoundingBox::unit_square()).unwrap();
        let loaded = parse_mesh(&write_mesh(&built), Path::new("one.mesh")).unwrap();
        assert_eq!(loaded.num_cells(), 1);
        assert_eq!(loaded.cells[0].volume, built.cells[0].volume);
        assert_eq!(loaded.cells[0].center, built.cells[0].center);
        for (a, b) in loaded.edges.iter().zip(&built.edges) {
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.measure, b.measure);
            assert_eq!(a.transmissibility, b.transmissibility);
            assert_eq!(a.normal, b.normal);
        }
    }

    #[test]
    fn non_orthogonal_pair_names_the_edge() {
        let bad = TWO_CELLS.replace("cell 1 0.5 0.75 0.5", "cell 1 0.5 0.75 0.6");
        match parse_mesh(&bad, Path::new("bad.mesh")) {
            Err(Error::InadmissibleMesh(r)) => {
                assert!(r.has(ViolationKind::NonOrthogonal, Entity::Edge(0)), "{r}");
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = TWO_CELLS.replace("edge 4 0.5 boundary", "edge 4 0.5 sideways");
        match parse_mesh(&bad, Path::new("x.mesh")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_mesh("", Path::new("e")), Err(Error::Parse { .. })));
        let bad_tag = TWO_CELLS.replace("dirichlet", "robin");
        assert!(matches!(parse_mesh(&bad_tag, Path::new("x")), Err(Error::Parse { .. })));
    }
}
