//! Planar triangulations with marked boundary edges.

mod generate;
mod io;
mod quality;

pub use generate::{generate_lshape, generate_rectangle, Polygon};
pub use io::{parse_mesh, read_mesh, write_mesh, write_mesh_string};
pub use quality::{quality_report, MeshQualityReport};

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// A boundary edge, oriented so that the domain lies to its left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    /// Index of the polygon side (arc) the edge came from.
    pub label: u32,
}

/// Immutable triangulation of a polygonal domain Ω with its boundary Γ.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    boundary_vertices: Vec<usize>,
    boundary_loops: usize,
    edge_count: usize,
    name: String,
}

impl TriMesh {
    /// Validates and builds a mesh. When `boundary` is `None` the boundary
    /// is extracted from edge incidence counts and labeled 0.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, boundary: Option<Vec<BoundaryEdge>>) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::Validation("mesh has no triangles".into()));
        }
        if vertices.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Validation("non-finite vertex coordinate".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= nv) {
                return Err(Error::Validation(format!("triangle {t} references nonexistent vertex {bad}")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Validation(format!("triangle {t} repeats a vertex")));
            }
            let area = signed_area(&vertices, tri);
            if area <= 0.0 {
                return Err(Error::Validation(format!(
                    "triangle {t} is clockwise or degenerate (signed area {area:e})"
                )));
            }
        }

        // directed half-edges per undirected edge
        let mut edges: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_default().push((a, b));
            }
        }
        let mut extracted = Vec::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let uses = &edges[&(a.min(b), a.max(b))];
                match uses.len() {
                    1 => extracted.push(BoundaryEdge { nodes: [a, b], label: 0 }),
                    2 => {
                        if uses[0] == uses[1] {
                            return Err(Error::Validation(format!(
                                "inconsistent orientation: edge ({a}, {b}) traversed twice in the same direction"
                            )));
                        }
                    }
                    n => {
                        return Err(Error::Validation(format!("edge ({a}, {b}) shared by {n} triangles")));
                    }
                }
            }
        }

        let boundary_edges = match boundary {
            None => extracted,
            Some(given) => {
                let mut oriented: HashMap<(usize, usize), [usize; 2]> =
                    extracted.iter().map(|e| ((e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])), e.nodes)).collect();
                if given.len() != oriented.len() {
                    return Err(Error::Validation(format!(
                        "{} boundary edges listed but {} found from incidence",
                        given.len(),
                        oriented.len()
                    )));
                }
                let mut out = Vec::with_capacity(given.len());
                for e in given {
                    let [a, b] = e.nodes;
                    let nodes = oriented.remove(&(a.min(b), a.max(b))).ok_or_else(|| {
                        Error::Validation(format!("listed boundary edge ({a}, {b}) is not a boundary edge"))
                    })?;
                    out.push(BoundaryEdge { nodes, label: e.label });
                }
                out
            }
        };

        let boundary_loops = count_loops(&boundary_edges)?;
        let mut boundary_vertices: Vec<usize> = boundary_edges.iter().flat_map(|e| e.nodes).collect();
        boundary_vertices.sort_unstable();
        boundary_vertices.dedup();

        Ok(TriMesh {
            vertices,
            triangles,
            boundary_edges,
            boundary_vertices,
            boundary_loops,
            edge_count: edges.len(),
            name: String::from("mesh"),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Identifier used in reports.
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Sorted indices of vertices on Γ.
    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_count
    }

    pub fn boundary_loops(&self) -> usize {
        self.boundary_loops
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    /// |Ω|
    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn edge_length(&self, e: &BoundaryEdge) -> f64 {
        let [a, b] = e.nodes;
        dist(self.vertices[a], self.vertices[b])
    }

    /// σ(Γ)
    pub fn perimeter(&self) -> f64 {
        self.boundary_edges.iter().map(|e| self.edge_length(e)).sum()
    }

    /// Outward unit normal of a boundary edge.
    pub fn outward_normal(&self, e: &BoundaryEdge) -> [f64; 2] {
        let [a, b] = e.nodes;
        let (p, q) = (self.vertices[a], self.vertices[b]);
        let len = dist(p, q);
        [(q[1] - p[1]) / len, -(q[0] - p[0]) / len]
    }

    pub fn edge_midpoint(&self, e: &BoundaryEdge) -> Point {
        let [a, b] = e.nodes;
        let (p, q) = (self.vertices[a], self.vertices[b]);
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }

    /// Distinct arc labels in ascending order.
    pub fn arc_labels(&self) -> Vec<u32> {
        let mut l: Vec<u32> = self.boundary_edges.iter().map(|e| e.label).collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// Connected components of the triangle adjacency graph.
    pub fn connected_components(&self) -> usize {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for tri in &self.triangles {
            for k in 1..3 {
                let (a, b) = (find(&mut parent, tri[0]), find(&mut parent, tri[k]));
                parent[a] = b;
            }
        }
        let mut used = vec![false; n];
        for tri in &self.triangles {
            used[tri[0]] = true;
        }
        (0..n).filter(|&v| used[v] && find(&mut parent, v) == v).count()
    }

    /// `V − E + T`, which equals `components − holes` for a planar mesh.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count as i64 + self.triangles.len() as i64
    }

    /// Replaces boundary labels, one per boundary edge.
    pub fn relabel(mut self, labels: &[u32]) -> Result<Self> {
        if labels.len() != self.boundary_edges.len() {
            return Err(Error::invalid("one label per boundary edge required"));
        }
        for (e, &l) in self.boundary_edges.iter_mut().zip(labels) {
            e.label = l;
        }
        Ok(self)
    }
}

/// Geometric equality; the report name is ignored.
impl PartialEq for TriMesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
            && self.triangles == other.triangles
            && self.boundary_edges == other.boundary_edges
    }
}

fn dist(p: Point, q: Point) -> f64 {
    (q[0] - p[0]).hypot(q[1] - p[1])
}

fn signed_area(v: &[Point], tri: &[usize; 3]) -> f64 {
    let (a, b, c) = (v[tri[0]], v[tri[1]], v[tri[2]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn count_loops(edges: &[BoundaryEdge]) -> Result<usize> {
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut incoming: HashMap<usize, usize> = HashMap::new();
    for e in edges {
        let [a, b] = e.nodes;
        if next.insert(a, b).is_some() {
            return Err(Error::Validation(format!("boundary vertex {a} has two outgoing boundary edges")));
        }
        *incoming.entry(b).or_default() += 1;
    }
    if next.len() != incoming.len() || incoming.values().any(|&c| c != 1) {
        return Err(Error::Validation("boundary edges do not form closed loops".into()));
    }
    let mut starts: Vec<usize> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut visited = std::collections::HashSet::new();
    let mut loops = 0;
    for s in starts {
        if visited.contains(&s) {
            continue;
        }
        loops += 1;
        let mut v = s;
        while visited.insert(v) {
            v = *next.get(&v).ok_or_else(|| Error::Validation("open boundary chain".into()))?;
        }
        if v != s {
            return Err(Error::Validation("boundary chain does not close".into()));
        }
    }
    Ok(loops)
}
