//! P1 finite-element matrices for the interior and boundary forms.

mod coefficient;
pub mod norms;
mod state;

pub use coefficient::BoundaryCoefficient;
pub use state::{BoundaryLoad, ProductState};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::sparse::{lu_factor, CsrMatrix};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassLumping {
    Consistent,
    /// Row-sum lumping of interior and boundary mass.
    Lumped,
}

/// Whether the boundary carries its own L²(Γ) component (Wentzell) or not
/// (plain Neumann problem on L²(Ω)).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryModel {
    Wentzell,
    Neumann,
}

/// Assembled matrices for one mesh and one β.
///
/// * `K`: stiffness, `∫ ∇φ_j·∇φ_i`
/// * `M`: interior mass (active variant), `∫ φ_j φ_i`
/// * `B`: boundary mass, `∫_Γ φ_j φ_i`
/// * `B_β`: `∫_Γ β φ_j φ_i`, β constant per edge
/// * `G = M + B`: Gram matrix of `L²(Ω) ⊕ L²(Γ)` on trace-consistent pairs
///
/// For [`BoundaryModel::Neumann`] `B_β = 0` and `G = M`.
#[derive(Debug, Clone)]
pub struct OperatorBundle {
    mesh: Arc<TriMesh>,
    beta: BoundaryCoefficient,
    lumping: MassLumping,
    model: BoundaryModel,
    stiffness: CsrMatrix,
    mass_consistent: CsrMatrix,
    mass_lumped: CsrMatrix,
    boundary_mass: CsrMatrix,
    beta_mass: CsrMatrix,
    gram: CsrMatrix,
    boundary_nodes: Arc<[usize]>,
    boundary_index: Vec<Option<usize>>,
}

/// Element stiffness of a P1 triangle from the standard gradient formula.
pub fn element_stiffness(p: [[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let mut b = [0.0; 3];
    let mut c = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        b[i] = p[j][1] - p[k][1];
        c[i] = p[k][0] - p[j][0];
    }
    let mut ke = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ke[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    ke
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn assemble(mesh: &TriMesh, beta: &BoundaryCoefficient, lumping: MassLumping) -> Result<OperatorBundle> {
    assemble_with_model(Arc::new(mesh.clone()), beta.clone(), lumping, BoundaryModel::Wentzell)
}

/// Neumann-Laplacian bundle: no boundary component in the state space.
pub fn assemble_neumann(mesh: &TriMesh, lumping: MassLumping) -> Result<OperatorBundle> {
    let beta = BoundaryCoefficient::constant(mesh, C64::new(0.0, 0.0));
    assemble_with_model(Arc::new(mesh.clone()), beta, lumping, BoundaryModel::Neumann)
}

pub fn assemble_with_model(
    mesh: Arc<TriMesh>,
    beta: BoundaryCoefficient,
    lumping: MassLumping,
    model: BoundaryModel,
) -> Result<OperatorBundle> {
    let n = mesh.num_vertices();
    if beta.len() != mesh.boundary_edges().len() {
        return Err(Error::invalid(format!(
            "beta has {} values but the mesh has {} boundary edges",
            beta.len(),
            mesh.boundary_edges().len()
        )));
    }
    let v = mesh.vertices();
    let mut k_trip = Vec::with_capacity(9 * mesh.num_triangles());
    let mut m_trip = Vec::with_capacity(9 * mesh.num_triangles());
    let mut ml_trip = Vec::with_capacity(3 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let ke = element_stiffness([v[tri[0]], v[tri[1]], v[tri[2]]]);
        let area = mesh.triangle_area(t);
        for i in 0..3 {
            for j in 0..3 {
                k_trip.push((tri[i], tri[j], real(ke[i][j])));
                let me = if i == j { area / 6.0 } else { area / 12.0 };
                m_trip.push((tri[i], tri[j], real(me)));
            }
            ml_trip.push((tri[i], tri[i], real(area / 3.0)));
        }
    }
    let mut b_trip = Vec::new();
    let mut bb_trip = Vec::new();
    for (e, &b) in mesh.boundary_edges().iter().zip(beta.values()) {
        let len = mesh.edge_length(e);
        let [p, q] = e.nodes;
        match lumping {
            MassLumping::Consistent => {
                for (i, j, w) in [(p, p, 2.0), (q, q, 2.0), (p, q, 1.0), (q, p, 1.0)] {
                    b_trip.push((i, j, real(w * len / 6.0)));
                    bb_trip.push((i, j, b * (w * len / 6.0)));
                }
            }
            MassLumping::Lumped => {
                for i in [p, q] {
                    b_trip.push((i, i, real(len / 2.0)));
                    bb_trip.push((i, i, b * (len / 2.0)));
                }
            }
        }
    }
    let stiffness = CsrMatrix::from_triplets(n, n, k_trip)?;
    let mass_consistent = CsrMatrix::from_triplets(n, n, m_trip)?;
    let mass_lumped = CsrMatrix::from_triplets(n, n, ml_trip)?;
    let boundary_mass = CsrMatrix::from_triplets(n, n, b_trip)?;
    let (beta_mass, gram) = {
        let m = match lumping {
            MassLumping::Consistent => &mass_consistent,
            MassLumping::Lumped => &mass_lumped,
        };
        match model {
            BoundaryModel::Wentzell => (CsrMatrix::from_triplets(n, n, bb_trip)?, m.add(&boundary_mass)?),
            BoundaryModel::Neumann => (CsrMatrix::zeros(n, n), m.clone()),
        }
    };
    let boundary_nodes: Arc<[usize]> = mesh.boundary_vertices().into();
    let mut boundary_index = vec![None; n];
    for (k, &i) in boundary_nodes.iter().enumerate() {
        boundary_index[i] = Some(k);
    }
    Ok(OperatorBundle {
        mesh,
        beta,
        lumping,
        model,
        stiffness,
        mass_consistent,
        mass_lumped,
        boundary_mass,
        beta_mass,
        gram,
        boundary_nodes,
        boundary_index,
    })
}

impl OperatorBundle {
    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<TriMesh> {
        Arc::clone(&self.mesh)
    }

    pub fn beta(&self) -> &BoundaryCoefficient {
        &self.beta
    }

    pub fn lumping(&self) -> MassLumping {
        self.lumping
    }

    pub fn model(&self) -> BoundaryModel {
        self.model
    }

    pub fn n_total(&self) -> usize {
        self.mesh.num_vertices()
    }

    /// `K`
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// Interior mass in the active lumping variant.
    pub fn mass(&self) -> &CsrMatrix {
        match self.lumping {
            MassLumping::Consistent => &self.mass_consistent,
            MassLumping::Lumped => &self.mass_lumped,
        }
    }

    pub fn mass_consistent(&self) -> &CsrMatrix {
        &self.mass_consistent
    }

    pub fn mass_lumped(&self) -> &CsrMatrix {
        &self.mass_lumped
    }

    /// `∫_Γ φ_j φ_i` (active lumping), present for both boundary models.
    pub fn boundary_mass(&self) -> &CsrMatrix {
        &self.boundary_mass
    }

    /// `B_β`
    pub fn beta_mass(&self) -> &CsrMatrix {
        &self.beta_mass
    }

    /// `G`
    pub fn gram(&self) -> &CsrMatrix {
        &self.gram
    }

    /// `K + M`, the Gram matrix of the H¹(Ω) inner product.
    pub fn h1_gram(&self) -> CsrMatrix {
        self.stiffness.add(self.mass()).expect("same dimensions")
    }

    /// Boundary nodes in ascending order; position `k` is boundary index `k`.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn boundary_nodes_arc(&self) -> Arc<[usize]> {
        Arc::clone(&self.boundary_nodes)
    }

    pub fn boundary_index(&self, node: usize) -> Option<usize> {
        self.boundary_index[node]
    }

    /// Boundary-node block `B_ΓΓ` of the boundary mass.
    pub fn boundary_block(&self) -> CsrMatrix {
        self.boundary_mass.submatrix(&self.boundary_nodes, &self.boundary_nodes)
    }

    /// `S_ω = K + B_β + ω G`; `v* S_ω u` realizes the shifted form `a_ω(u, v)`.
    pub fn shifted_form_matrix(&self, omega: f64) -> CsrMatrix {
        let s0 = self.stiffness.add(&self.beta_mass).expect("same dimensions");
        s0.linear_combination(real(1.0), &self.gram, real(omega)).expect("same dimensions")
    }

    /// Restriction of a nodal vector to the boundary nodes.
    pub fn restrict_to_boundary(&self, u: &[C64]) -> Vec<C64> {
        self.boundary_nodes.iter().map(|&i| u[i]).collect()
    }

    /// Extension by zero of boundary-node values to a full nodal vector.
    pub fn extend_from_boundary(&self, g: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n_total()];
        for (&i, &v) in self.boundary_nodes.iter().zip(g) {
            out[i] = v;
        }
        out
    }

    /// `‖u‖_G = sqrt(u* G u)`.
    pub fn g_norm(&self, u: &[C64]) -> f64 {
        self.gram.form(u, u).map(|v| v.re.max(0.0).sqrt()).unwrap_or(f64::NAN)
    }

    /// `sqrt(u* (K + M) u)`.
    pub fn h1_norm(&self, u: &[C64]) -> f64 {
        let k = self.stiffness.form(u, u).map(|v| v.re).unwrap_or(f64::NAN);
        let m = self.mass().form(u, u).map(|v| v.re).unwrap_or(f64::NAN);
        (k + m).max(0.0).sqrt()
    }
}

/// See [`OperatorBundle::shifted_form_matrix`].
pub fn shifted_form_matrix(bundle: &OperatorBundle, omega: f64) -> CsrMatrix {
    bundle.shifted_form_matrix(omega)
}

/// Discrete Green-formula normal derivative: the boundary nodal vector `h`
/// with `B_ΓΓ h = (K u + M f)|_Γ`, where `f` is the nodal representation of
/// `Δu`.
pub fn discrete_normal_derivative(bundle: &OperatorBundle, u: &ProductState, laplacian: &[C64]) -> Result<Vec<C64>> {
    let n = bundle.n_total();
    if u.len() != n || laplacian.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.len().min(laplacian.len()) });
    }
    if bundle.boundary_nodes.is_empty() {
        return Err(Error::InvalidState("no boundary nodes".into()));
    }
    let ku = bundle.stiffness.spmv(u.coeffs())?;
    let mf = bundle.mass().spmv(laplacian)?;
    let rhs: Vec<C64> = bundle.boundary_nodes.iter().map(|&i| ku[i] + mf[i]).collect();
    let block = bundle.boundary_block();
    let lu = lu_factor(&block).map_err(|e| Error::InvalidState(format!("boundary mass block: {e}")))?;
    lu.solve(&rhs)
}
