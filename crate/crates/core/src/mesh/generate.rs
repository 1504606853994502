use super::{Point, TriMesh};
use crate::error::{Error, Result};

/// Simple polygon given by its vertices in counterclockwise order. Side `k`
/// runs from vertex `k` to vertex `k + 1` and is the arc labeled `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn rectangle(width: f64, height: f64) -> Self {
        Polygon { vertices: vec![[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]] }
    }

    /// `[0,1]² \ [1/2,1]×[1/2,1]`.
    pub fn lshape() -> Self {
        Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.5], [0.5, 0.5], [0.5, 1.0], [0.0, 1.0]] }
    }

    /// Shoelace formula.
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|k| {
                let (p, q) = (self.vertices[k], self.vertices[(k + 1) % n]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|k| super::dist(self.vertices[k], self.vertices[(k + 1) % n])).sum()
    }

    /// Side containing segment `p`–`q`, if any.
    pub fn side_of(&self, p: Point, q: Point) -> Option<u32> {
        let n = self.vertices.len();
        let scale = self.perimeter();
        (0..n)
            .find(|&k| {
                let (a, b) = (self.vertices[k], self.vertices[(k + 1) % n]);
                on_segment(a, b, p, 1e-12 * scale) && on_segment(a, b, q, 1e-12 * scale)
            })
            .map(|k| k as u32)
    }
}

fn on_segment(a: Point, b: Point, p: Point, tol: f64) -> bool {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = dx.hypot(dy);
    let cross = (dx * (p[1] - a[1]) - dy * (p[0] - a[0])) / len;
    let t = (dx * (p[0] - a[0]) + dy * (p[1] - a[1])) / (len * len);
    cross.abs() <= tol && t >= -tol && t <= 1.0 + tol
}

fn label_by_polygon(mesh: TriMesh, polygon: &Polygon) -> Result<TriMesh> {
    let labels = mesh
        .boundary_edges()
        .iter()
        .map(|e| {
            let [a, b] = e.nodes;
            polygon
                .side_of(mesh.vertices()[a], mesh.vertices()[b])
                .ok_or_else(|| Error::Validation(format!("boundary edge ({a}, {b}) lies on no polygon side")))
        })
        .collect::<Result<Vec<_>>>()?;
    mesh.relabel(&labels)
}

/// Splits the grid cell with lower-left vertex `(i, j)` into two right
/// triangles, alternating the diagonal in a checkerboard pattern.
fn split_cell(i: usize, j: usize, idx: impl Fn(usize, usize) -> usize, out: &mut Vec<[usize; 3]>) {
    let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
    if (i + j) % 2 == 0 {
        out.push([a, b, c]);
        out.push([a, c, d]);
    } else {
        out.push([a, b, d]);
        out.push([b, c, d]);
    }
}

/// Structured mesh of `[0, width] × [0, height]` with `nx × ny` cells, each
/// cut along one diagonal (alternating), so every triangle is right-angled.
/// Arcs: 0 bottom, 1 right, 2 top, 3 left.
pub fn generate_rectangle(width: f64, height: f64, nx: usize, ny: usize) -> Result<TriMesh> {
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        return Err(Error::invalid(format!("rectangle dimensions must be positive, got {width} x {height}")));
    }
    if nx < 1 || ny < 1 {
        return Err(Error::invalid(format!("need at least one cell per direction, got {nx} x {ny}")));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            split_cell(i, j, idx, &mut triangles);
        }
    }
    let mesh = TriMesh::new(vertices, triangles, None)?;
    Ok(label_by_polygon(mesh, &Polygon::rectangle(width, height))?.with_name(format!("rect-{width}x{height}-{nx}x{ny}")))
}

/// L-shaped domain `[0,1]² \ [1/2,1]×[1/2,1]` on a `2n × 2n` grid with the
/// upper-right quadrant removed (`3n²` cells). Arcs follow [`Polygon::lshape`].
pub fn generate_lshape(n: usize) -> Result<TriMesh> {
    if n < 1 {
        return Err(Error::invalid("lshape resolution must be at least 1"));
    }
    let grid = 2 * n;
    let inside_vertex = |i: usize, j: usize| i <= n || j <= n;
    let mut index = vec![usize::MAX; (grid + 1) * (grid + 1)];
    let mut vertices = Vec::new();
    for j in 0..=grid {
        for i in 0..=grid {
            if inside_vertex(i, j) {
                index[j * (grid + 1) + i] = vertices.len();
                vertices.push([i as f64 / grid as f64, j as f64 / grid as f64]);
            }
        }
    }
    let idx = |i: usize, j: usize| index[j * (grid + 1) + i];
    let mut triangles = Vec::with_capacity(6 * n * n);
    for j in 0..grid {
        for i in 0..grid {
            if i < n || j < n {
                split_cell(i, j, idx, &mut triangles);
            }
        }
    }
    let mesh = TriMesh::new(vertices, triangles, None)?;
    Ok(label_by_polygon(mesh, &Polygon::lshape())?.with_name(format!("lshape-{n}")))
}
