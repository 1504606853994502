//! Finite-element laboratory for the Laplacian with Wentzell (dynamic)
//! boundary conditions on planar polygonal domains.
//!
//! The discrete state space is the image of the trace map
//! `u -> (u, u|Γ)` in `L²(Ω) ⊕ L²(Γ)`. Conforming P1 elements make that map
//! injective, so a state is a single nodal vector and the product inner
//! product is carried by the Gram matrix `G = M + B` (interior mass plus
//! boundary mass). The Wentzell operator acts as `A = G⁻¹ (K + B_β)` and is
//! only ever applied through sparse solves.
//!
//! Modules, bottom-up:
//!
//! * [`mesh`]: triangulations, boundary extraction, the `wmesh` text format.
//! * [`sparse`]: complex CSR storage, sparse LU with RCM ordering, BiCGSTAB.
//! * [`fem`]: P1 assembly of stiffness, mass and boundary matrices.
//! * [`operator`]: the Wentzell operator, resolvents, Robin solver, time steppers.
//! * [`verification`]: executable checks of contractivity, invariance,
//!   level-set sup-norm bounds and related properties.

pub mod error;
pub mod fem;
pub mod mesh;
pub mod operator;
pub mod sparse;
pub mod verification;

pub use error::{Error, Result};
pub use fem::{BoundaryCoefficient, BoundaryLoad, MassLumping, OperatorBundle, ProductState};
pub use mesh::{MeshQualityReport, TriMesh};
pub use operator::{Scheme, SectorEstimate, Trajectory, WentzellOperator};
pub use sparse::{CsrMatrix, LuFactorization};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
