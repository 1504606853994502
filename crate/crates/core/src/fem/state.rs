use std::sync::Arc;

use super::{MassLumping, OperatorBundle};
use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};
use crate::C64;

/// A discrete pair `(u, u_Γ)` in `L²(Ω) ⊕ L²(Γ)`.
///
/// Only the nodal vector is stored; the boundary part is by construction its
/// restriction to the boundary nodes, so every state lies in the image of
/// the trace map.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    coeffs: Vec<C64>,
    boundary_nodes: Arc<[usize]>,
}

impl ProductState {
    pub fn new(bundle: &OperatorBundle, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != bundle.n_total() {
            return Err(Error::DimensionMismatch { expected: bundle.n_total(), got: coeffs.len() });
        }
        Ok(ProductState { coeffs, boundary_nodes: bundle.boundary_nodes_arc() })
    }

    pub(crate) fn from_parts(coeffs: Vec<C64>, boundary_nodes: Arc<[usize]>) -> Self {
        ProductState { coeffs, boundary_nodes }
    }

    pub fn constant(bundle: &OperatorBundle, value: C64) -> Self {
        ProductState { coeffs: vec![value; bundle.n_total()], boundary_nodes: bundle.boundary_nodes_arc() }
    }

    /// Nodal interpolant of a closed form.
    pub fn from_fn(bundle: &OperatorBundle, f: impl Fn(Point) -> C64) -> Self {
        let coeffs = bundle.mesh().vertices().iter().map(|&p| f(p)).collect();
        ProductState { coeffs, boundary_nodes: bundle.boundary_nodes_arc() }
    }

    /// Nodal vector `u`.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `u_Γ`, the restriction to boundary nodes.
    pub fn trace(&self) -> Vec<C64> {
        self.boundary_nodes.iter().map(|&i| self.coeffs[i]).collect()
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    /// `max |u_i|` over all nodes (covers both components).
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn with_coeffs(&self, coeffs: Vec<C64>) -> Self {
        debug_assert_eq!(coeffs.len(), self.coeffs.len());
        ProductState { coeffs, boundary_nodes: Arc::clone(&self.boundary_nodes) }
    }
}

/// Boundary data `g` for Robin-type right-hand sides.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryLoad {
    /// Continuous P1 data, one value per boundary node (ascending node order).
    Nodal(Vec<C64>),
    /// Linear data on each boundary edge, values at its two end points.
    /// Allows jumps at corners (e.g. normal derivatives).
    PerEdge(Vec<[C64; 2]>),
}

impl BoundaryLoad {
    pub fn zero(bundle: &OperatorBundle) -> Self {
        BoundaryLoad::Nodal(vec![C64::new(0.0, 0.0); bundle.boundary_nodes().len()])
    }

    /// Per-edge samples of `g(point, outward normal, arc label)` at edge end points.
    pub fn per_edge_fn(mesh: &TriMesh, g: impl Fn(Point, [f64; 2], u32) -> C64) -> Self {
        let v = mesh.vertices();
        BoundaryLoad::PerEdge(
            mesh.boundary_edges()
                .iter()
                .map(|e| {
                    let n = mesh.outward_normal(e);
                    [g(v[e.nodes[0]], n, e.label), g(v[e.nodes[1]], n, e.label)]
                })
                .collect(),
        )
    }

    /// Load vector `∫_Γ g φ_i` (lumped when the bundle is lumped).
    pub fn load_vector(&self, bundle: &OperatorBundle) -> Result<Vec<C64>> {
        match self {
            BoundaryLoad::Nodal(g) => {
                if g.len() != bundle.boundary_nodes().len() {
                    return Err(Error::DimensionMismatch { expected: bundle.boundary_nodes().len(), got: g.len() });
                }
                bundle.boundary_mass().spmv(&bundle.extend_from_boundary(g))
            }
            BoundaryLoad::PerEdge(vals) => {
                let mesh = bundle.mesh();
                if vals.len() != mesh.boundary_edges().len() {
                    return Err(Error::DimensionMismatch { expected: mesh.boundary_edges().len(), got: vals.len() });
                }
                let mut out = vec![C64::new(0.0, 0.0); bundle.n_total()];
                for (e, &[ga, gb]) in mesh.boundary_edges().iter().zip(vals) {
                    let len = mesh.edge_length(e);
                    let [a, b] = e.nodes;
                    match bundle.lumping() {
                        MassLumping::Consistent => {
                            out[a] += (2.0 * ga + gb) * (len / 6.0);
                            out[b] += (ga + 2.0 * gb) * (len / 6.0);
                        }
                        MassLumping::Lumped => {
                            out[a] += ga * (len / 2.0);
                            out[b] += gb * (len / 2.0);
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// `L²(Γ)` projection onto continuous boundary P1 functions, as nodal values.
    pub fn to_nodal(&self, bundle: &OperatorBundle) -> Result<Vec<C64>> {
        match self {
            BoundaryLoad::Nodal(g) => Ok(g.clone()),
            BoundaryLoad::PerEdge(_) => {
                let load = self.load_vector(bundle)?;
                let rhs = bundle.restrict_to_boundary(&load);
                crate::sparse::lu_factor(&bundle.boundary_block())?.solve(&rhs)
            }
        }
    }
}
