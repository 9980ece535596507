//! Triangulations of the quarter unit disk `{x₁ ≥ 0, x₂ ≥ 0, x₁² + x₂² ≤ 1}`
//! and a whitespace-delimited text format for them.
//!
//! Boundary labels: `Γ1` is the segment on `x₂ = 0`, `Γ2` the segment on
//! `x₁ = 0` and `Γ3` the arc.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryLabel {
    Gamma1,
    Gamma2,
    Gamma3,
}

impl BoundaryLabel {
    pub fn id(self) -> u8 {
        match self {
            BoundaryLabel::Gamma1 => 1,
            BoundaryLabel::Gamma2 => 2,
            BoundaryLabel::Gamma3 => 3,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(BoundaryLabel::Gamma1),
            2 => Some(BoundaryLabel::Gamma2),
            3 => Some(BoundaryLabel::Gamma3),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub label: BoundaryLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
}

/// Rings in the level-1 mesh; each further level doubles it.
const BASE_RINGS: usize = 14;

/// Structured radial-angular mesh: `n` equally spaced rings, ring `i` carrying
/// `i` arc segments, with `n = 14·2^(level−1)`.
pub fn quarter_disk_mesh(level: u32) -> Result<Mesh> {
    if !(1..=3).contains(&level) {
        return Err(Error::ParameterDomain(format!(
            "mesh level must be 1, 2 or 3, got {level}"
        )));
    }
    ring_mesh(BASE_RINGS << (level - 1))
}

/// Same construction with an arbitrary ring count.
pub fn ring_mesh(rings: usize) -> Result<Mesh> {
    if rings == 0 {
        return Err(Error::ParameterDomain("ring count must be positive".into()));
    }
    let n = rings;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut vertices = vec![[0.0, 0.0]];
    // start[i] = index of the first vertex of ring i
    let mut start = vec![0usize; n + 1];
    for i in 1..=n {
        start[i] = vertices.len();
        let r = i as f64 / n as f64;
        for j in 0..=i {
            let (s, c) = if j == 0 {
                (0.0, 1.0)
            } else if j == i {
                (1.0, 0.0)
            } else {
                (half_pi * j as f64 / i as f64).sin_cos()
            };
            vertices.push([r * c, r * s]);
        }
    }

    let mut triangles = Vec::with_capacity(n * n);
    for i in 1..=n {
        let inner_segments = i - 1;
        let inner = |a: usize| if i == 1 { 0 } else { start[i - 1] + a };
        let outer = |b: usize| start[i] + b;
        let (mut a, mut b) = (0usize, 0usize);
        while a < inner_segments || b < i {
            // advance along the outer ring when its next angle is not larger,
            // comparing (b+1)/i with (a+1)/(i−1) exactly
            let take_outer = b < i && (a == inner_segments || (b + 1) * inner_segments <= (a + 1) * i);
            if take_outer {
                triangles.push([inner(a), outer(b), outer(b + 1)]);
                b += 1;
            } else {
                triangles.push([inner(a), outer(b), inner(a + 1)]);
                a += 1;
            }
        }
    }

    let mut boundary_edges = Vec::with_capacity(3 * n);
    let mut prev = 0;
    for i in 1..=n {
        boundary_edges.push(BoundaryEdge {
            vertices: [prev, start[i]],
            label: BoundaryLabel::Gamma1,
        });
        prev = start[i];
    }
    for j in 0..n {
        boundary_edges.push(BoundaryEdge {
            vertices: [start[n] + j, start[n] + j + 1],
            label: BoundaryLabel::Gamma3,
        });
    }
    for i in (1..=n).rev() {
        let here = start[i] + i;
        let next = if i == 1 { 0 } else { start[i - 1] + i - 1 };
        boundary_edges.push(BoundaryEdge {
            vertices: [here, next],
            label: BoundaryLabel::Gamma2,
        });
    }

    let mesh = Mesh {
        vertices,
        triangles,
        boundary_edges,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

impl Mesh {
    /// Builds a mesh from raw parts and validates every invariant.
    pub fn new(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, boundary_edges: Vec<BoundaryEdge>) -> Result<Self> {
        let mesh = Self {
            vertices,
            triangles,
            boundary_edges,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn cell_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// `π/4` minus the polygon area; positive for chord approximations.
    pub fn area_deficit(&self) -> f64 {
        std::f64::consts::FRAC_PI_4 - self.total_area()
    }

    /// Checks every structural invariant, naming the first one that fails.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        if nv == 0 || self.triangles.is_empty() {
            return Err(Error::Validation("mesh has no vertices or no triangles".into()));
        }
        for (i, &[x, y]) in self.vertices.iter().enumerate() {
            if !(x.is_finite() && y.is_finite()) || x < 0.0 || y < 0.0 || x * x + y * y > 1.0 + GEOM_TOL {
                return Err(Error::Validation(format!(
                    "vertex {i} ({x}, {y}) lies outside the quarter disk"
                )));
            }
        }
        let mut edge_use: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::Validation(format!("triangle {t} references a missing vertex")));
            }
            if self.triangle_area(t) <= 0.0 {
                return Err(Error::Validation(format!("negative area in triangle {t}")));
            }
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edge_use.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut boundary_degree = vec![0usize; nv];
        let mut labelled = HashMap::new();
        for (e, edge) in self.boundary_edges.iter().enumerate() {
            let [a, b] = edge.vertices;
            if a >= nv || b >= nv || a == b {
                return Err(Error::Validation(format!("boundary edge {e} has invalid vertices")));
            }
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let on_segment = match edge.label {
                BoundaryLabel::Gamma1 => pa[1].abs() <= GEOM_TOL && pb[1].abs() <= GEOM_TOL,
                BoundaryLabel::Gamma2 => pa[0].abs() <= GEOM_TOL && pb[0].abs() <= GEOM_TOL,
                BoundaryLabel::Gamma3 => [pa, pb]
                    .iter()
                    .all(|p| (p[0] * p[0] + p[1] * p[1] - 1.0).abs() <= GEOM_TOL),
            };
            if !on_segment {
                return Err(Error::Validation(format!(
                    "boundary edge {e} does not lie on its segment {:?}",
                    edge.label
                )));
            }
            if labelled.insert((a.min(b), a.max(b)), e).is_some() {
                return Err(Error::Validation(format!("boundary edge {e} is listed twice")));
            }
            boundary_degree[a] += 1;
            boundary_degree[b] += 1;
        }
        for (&(a, b), &count) in &edge_use {
            match (count, labelled.contains_key(&(a, b))) {
                (1, true) | (2, false) => {}
                (1, false) => {
                    return Err(Error::Validation(format!(
                        "edge ({a}, {b}) lies on the boundary but carries no label"
                    )))
                }
                (2, true) => {
                    return Err(Error::Validation(format!(
                        "labelled boundary edge ({a}, {b}) is interior"
                    )))
                }
                _ => {
                    return Err(Error::Validation(format!(
                        "edge ({a}, {b}) is shared by {count} triangles (non-conforming)"
                    )))
                }
            }
        }
        if labelled.keys().any(|k| !edge_use.contains_key(k)) {
            return Err(Error::Validation("a boundary edge is not a triangle edge".into()));
        }
        if boundary_degree.iter().any(|&d| d != 0 && d != 2) {
            return Err(Error::Validation("boundary edges do not form closed loops".into()));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "vertices {} triangles {} edges {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        );
        for [x, y] in &self.vertices {
            let _ = writeln!(s, "{x:.16e} {y:.16e}");
        }
        for [a, b, c] in &self.triangles {
            let _ = writeln!(s, "{a} {b} {c}");
        }
        for e in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {}", e.vertices[0], e.vertices[1], e.label.id());
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty file, expected 'vertices N triangles T edges E'".into(),
        })?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || Error::Parse {
            line: hline,
            msg: format!("malformed header '{header}'"),
        };
        if h.len() != 6 || h[0] != "vertices" || h[2] != "triangles" || h[4] != "edges" {
            return Err(bad_header());
        }
        let count = |s: &str| s.parse::<usize>().map_err(|_| bad_header());
        let (nv, nt, ne) = (count(h[1])?, count(h[3])?, count(h[5])?);

        fn fields<T: std::str::FromStr>(
            next: Option<(usize, &str)>,
            k: usize,
            what: &str,
            last_line: usize,
        ) -> Result<(usize, Vec<T>)> {
            let (line, l) = next.ok_or(Error::Parse {
                line: last_line + 1,
                msg: format!("unexpected end of file while reading {what}"),
            })?;
            let vals: Vec<T> = l
                .split_whitespace()
                .map(|t| t.parse::<T>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line,
                    msg: format!("cannot parse {what} '{l}'"),
                })?;
            if vals.len() != k {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {k} fields for {what}, found {}", vals.len()),
                });
            }
            Ok((line, vals))
        }

        let mut last = hline;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, v) = fields::<f64>(lines.next(), 2, "vertex", last)?;
            last = line;
            vertices.push([v[0], v[1]]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (line, v) = fields::<usize>(lines.next(), 3, "triangle", last)?;
            last = line;
            triangles.push([v[0], v[1], v[2]]);
        }
        let mut boundary_edges = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (line, v) = fields::<usize>(lines.next(), 3, "boundary edge", last)?;
            last = line;
            let label = u8::try_from(v[2])
                .ok()
                .and_then(BoundaryLabel::from_id)
                .ok_or(Error::Parse {
                    line,
                    msg: format!("unknown boundary label {}", v[2]),
                })?;
            boundary_edges.push(BoundaryEdge {
                vertices: [v[0], v[1]],
                label,
            });
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse {
                line,
                msg: "trailing content after the declared entries".into(),
            });
        }
        Mesh::new(vertices, triangles, boundary_edges)
    }
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, mesh.to_text()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Mesh::from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_counts_within_band() {
        let bands = [(123, 208), (461, 848), (1731, 3317)];
        for (level, (v, c)) in (1..=3).zip(bands) {
            let m = quarter_disk_mesh(level).unwrap();
            let (v, c) = (v as f64, c as f64);
            let (mv, mc) = (m.vertex_count() as f64, m.cell_count() as f64);
            assert!((mv - v).abs() <= 0.15 * v, "level {level}: {mv} vertices");
            assert!((mc - c).abs() <= 0.15 * c, "level {level}: {mc} cells");
        }
    }

    #[test]
    fn level_one_exact_shape() {
        let m = quarter_disk_mesh(1).unwrap();
        assert_eq!(m.vertex_count(), 120);
        assert_eq!(m.cell_count(), 196);
        assert_eq!(m.boundary_edges().len(), 42);
    }

    #[test]
    fn invalid_level() {
        assert!(quarter_disk_mesh(0).is_err());
        assert!(quarter_disk_mesh(4).is_err());
    }

    #[test]
    fn area_deficit_shrinks() {
        let d1 = quarter_disk_mesh(1).unwrap().area_deficit();
        let d2 = quarter_disk_mesh(2).unwrap().area_deficit();
        assert!(d1 > 0.0 && d2 > 0.0);
        assert!(d1 / d2 >= 3.0, "{d1} / {d2}");
    }

    #[test]
    fn clockwise_triangle_rejected() {
        let m = quarter_disk_mesh(1).unwrap();
        let mut tris = m.triangles().to_vec();
        tris[5].swap(1, 2);
        let err = Mesh::new(m.vertices().to_vec(), tris, m.boundary_edges().to_vec()).unwrap_err();
        assert!(err.to_string().contains("negative area"), "{err}");
    }

    #[test]
    fn empty_text_is_parse_error() {
        assert!(matches!(Mesh::from_text(""), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn parse_error_names_line() {
        let text = quarter_disk_mesh(1).unwrap().to_text();
        let mut lines: Vec<&str> = text.lines().collect();
        lines[3] = "0.5 abc";
        match Mesh::from_text(&lines.join("\n")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }
}
