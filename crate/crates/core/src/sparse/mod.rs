//! Complex sparse kernels: CSR storage, RCM-ordered sparse LU and BiCGSTAB.

mod csr;
mod iterative;
mod lu;
pub mod market;
pub mod ordering;

pub use csr::CsrMatrix;
pub use iterative::{bicgstab, Converged, IdentityPreconditioner, Jacobi, NoConvergence, Preconditioner};
pub use lu::{lu_factor, lu_solve, LuFactorization, PIVOT_TOLERANCE};

use crate::C64;

/// `y = A x`.
pub fn spmv(a: &CsrMatrix, x: &[C64]) -> crate::Result<Vec<C64>> {
    a.spmv(x)
}
