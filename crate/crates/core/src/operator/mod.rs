//! The discrete Wentzell operator `A = G⁻¹ (K + B_β)` (the negative of the
//! discretized Δ^W), its resolvents, the Robin solver and time steppers.
//!
//! `A` is never formed. Every application goes through a sparse solve with
//! `G` or with `λG + K + B_β`; the weak identity `v* G (A u) = v* (K + B_β) u`
//! is what the solves realize.

mod sector;
mod stepping;

pub use sector::{sector_estimate, SectorEstimate};
pub use stepping::{
    euler_exponential, evolve, state_csv, step_crank_nicolson, step_implicit_euler, Observation, Observers, Scheme,
    Stepper, Trajectory,
};

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::fem::{BoundaryCoefficient, BoundaryLoad, OperatorBundle, ProductState};
use crate::sparse::{lu_factor, CsrMatrix, LuFactorization};
use crate::C64;

/// Relative residual accepted from a direct solve.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-9;

/// `ω₀ = max(1, −inf Re β, sup |Im β|)`.
///
/// Gives `ω₀ + Re β ≥ 0`, strict coercivity of the shifted form and a
/// numerical range inside the sector of half-angle π/4.
pub fn choose_omega0(beta: &BoundaryCoefficient) -> f64 {
    1f64.max(-beta.ess_inf_re()).max(beta.sup_abs_im())
}

#[derive(Debug)]
pub struct WentzellOperator {
    bundle: Arc<OperatorBundle>,
    omega0: f64,
    shift: f64,
    /// `K + B_β + shift·G`
    form: CsrMatrix,
    gram_lu: OnceLock<LuFactorization>,
}

impl Clone for WentzellOperator {
    fn clone(&self) -> Self {
        WentzellOperator {
            bundle: Arc::clone(&self.bundle),
            omega0: self.omega0,
            shift: self.shift,
            form: self.form.clone(),
            gram_lu: OnceLock::new(),
        }
    }
}

impl WentzellOperator {
    /// Unshifted operator with ω₀ chosen from β.
    pub fn new(bundle: impl Into<Arc<OperatorBundle>>) -> Self {
        let bundle = bundle.into();
        let omega0 = choose_omega0(bundle.beta());
        let form = bundle.shifted_form_matrix(0.0);
        WentzellOperator { bundle, omega0, shift: 0.0, form, gram_lu: OnceLock::new() }
    }

    /// Replaces ω₀ (the shift used by [`Self::shifted`] and the Robin solver
    /// precondition).
    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    /// Operator plus `shift`, i.e. `A + shift`.
    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self.form = self.bundle.shifted_form_matrix(shift);
        self.gram_lu = OnceLock::new();
        self
    }

    /// `A_{ω₀} = A + ω₀`.
    pub fn shifted(self) -> Self {
        let w = self.omega0;
        self.with_shift(w)
    }

    pub fn bundle(&self) -> &OperatorBundle {
        &self.bundle
    }

    pub fn bundle_arc(&self) -> Arc<OperatorBundle> {
        Arc::clone(&self.bundle)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// `S = K + B_β + shift·G`, so that `v* S u` is the (shifted) form.
    pub fn form_matrix(&self) -> &CsrMatrix {
        &self.form
    }

    /// `λG + S`.
    pub fn system_matrix(&self, lambda: f64) -> CsrMatrix {
        self.form
            .linear_combination(C64::new(1.0, 0.0), self.bundle.gram(), C64::new(lambda, 0.0))
            .expect("same dimensions")
    }

    fn gram_factor(&self) -> Result<&LuFactorization> {
        if let Some(lu) = self.gram_lu.get() {
            return Ok(lu);
        }
        let lu = lu_factor(self.bundle.gram()).map_err(|e| Error::Solver { lambda: f64::INFINITY, reason: format!("Gram matrix: {e}") })?;
        Ok(self.gram_lu.get_or_init(|| lu))
    }

    /// `A u = G⁻¹ S u`.
    pub fn apply(&self, u: &[C64]) -> Result<Vec<C64>> {
        let su = self.form.spmv(u)?;
        self.gram_factor()?.solve(&su)
    }

    /// Factors `λG + S` once for repeated resolvent applications.
    pub fn resolvent(&self, lambda: f64) -> Result<Resolvent> {
        if !lambda.is_finite() {
            return Err(Error::invalid(format!("lambda must be finite, got {lambda}")));
        }
        let matrix = self.system_matrix(lambda);
        let lu = lu_factor(&matrix).map_err(|e| Error::Solver {
            lambda,
            reason: format!("factorization of lambda*G + S (shift {}, omega0 {}): {e}", self.shift, self.omega0),
        })?;
        Ok(Resolvent { lambda, matrix, lu, bundle: Arc::clone(&self.bundle) })
    }

    pub fn state(&self, coeffs: Vec<C64>) -> Result<ProductState> {
        ProductState::new(&self.bundle, coeffs)
    }
}

/// Factored `λG + S`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    lambda: f64,
    matrix: CsrMatrix,
    lu: LuFactorization,
    bundle: Arc<OperatorBundle>,
}

impl Resolvent {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn factorization(&self) -> &LuFactorization {
        &self.lu
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Solves `(λG + S) u = load`, checking the relative residual.
    pub fn solve_load(&self, load: &[C64]) -> Result<ProductState> {
        let u = self.lu.solve(load)?;
        let r = self.matrix.spmv(&u)?;
        let inf = |v: &[C64]| v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let resid = r.iter().zip(load).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = self.matrix.norm_inf() * inf(&u) + inf(load);
        if resid > SOLVE_RESIDUAL_TOL * scale {
            return Err(Error::Solver {
                lambda: self.lambda,
                reason: format!(
                    "residual {resid:.3e} exceeds {SOLVE_RESIDUAL_TOL:e} x {scale:.3e} (pivot growth {:.3e})",
                    self.lu.pivot_growth()
                ),
            });
        }
        Ok(ProductState::from_parts(u, self.bundle.boundary_nodes_arc()))
    }

    /// `(λ + A)⁻¹ rhs`: solves `(λG + S) u = G rhs`.
    pub fn apply(&self, rhs: &ProductState) -> Result<ProductState> {
        let load = self.bundle.gram().spmv(rhs.coeffs())?;
        self.solve_load(&load)
    }

    /// `λ (λ + A)⁻¹ rhs`.
    pub fn apply_scaled(&self, rhs: &ProductState) -> Result<ProductState> {
        let u = self.apply(rhs)?;
        let lambda = self.lambda;
        Ok(u.with_coeffs(u.coeffs().iter().map(|v| v * lambda).collect()))
    }
}

/// `(λ + A)⁻¹ rhs` with a fresh factorization.
pub fn resolvent_apply(op: &WentzellOperator, lambda: f64, rhs: &ProductState) -> Result<ProductState> {
    op.resolvent(lambda)?.apply(rhs)
}

/// Galerkin solution of `λu − Δu = f` in Ω, `∂_ν u + (λ + β) u = g` on Γ:
/// `(λG + K + B_β) u = M f + ∫_Γ g φ_i`. Requires `λ ≥ ω₀`.
pub fn robin_solve(bundle: &OperatorBundle, lambda: f64, f: &[C64], g: &BoundaryLoad) -> Result<ProductState> {
    RobinSolver::new(Arc::new(bundle.clone()), lambda)?.solve(f, g)
}

/// Robin problem at a fixed λ with the factorization kept for many data.
#[derive(Debug, Clone)]
pub struct RobinSolver {
    resolvent: Resolvent,
    bundle: Arc<OperatorBundle>,
}

impl RobinSolver {
    pub fn new(bundle: Arc<OperatorBundle>, lambda: f64) -> Result<Self> {
        let omega0 = choose_omega0(bundle.beta());
        if !(lambda >= omega0) {
            return Err(Error::invalid(format!(
                "lambda = {lambda} is below omega0 = {omega0}; coercivity is not guaranteed"
            )));
        }
        let op = WentzellOperator::new(Arc::clone(&bundle));
        Ok(RobinSolver { resolvent: op.resolvent(lambda)?, bundle })
    }

    pub fn lambda(&self) -> f64 {
        self.resolvent.lambda()
    }

    /// `M f + ∫_Γ g φ_i`.
    pub fn load(&self, f: &[C64], g: &BoundaryLoad) -> Result<Vec<C64>> {
        let mut load = self.bundle.mass().spmv(f)?;
        for (l, b) in load.iter_mut().zip(g.load_vector(&self.bundle)?) {
            *l += b;
        }
        Ok(load)
    }

    pub fn solve(&self, f: &[C64], g: &BoundaryLoad) -> Result<ProductState> {
        self.resolvent.solve_load(&self.load(f, g)?)
    }

    pub fn system_matrix(&self) -> &CsrMatrix {
        self.resolvent.matrix()
    }
}
