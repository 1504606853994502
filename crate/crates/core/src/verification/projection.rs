use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::OperatorBundle;
use crate::operator::choose_omega0;
use crate::C64;

/// `(|z| ∧ 1) sign z`.
pub fn project_unit_ball(z: C64) -> C64 {
    let r = z.norm();
    if r <= 1.0 {
        z
    } else {
        z / r
    }
}

/// Nodal projection onto `{‖u‖_∞ ≤ 1, ‖u_Γ‖_∞ ≤ 1}`.
///
/// Interior and boundary components are projected separately; since the
/// boundary component is the restriction of the nodal vector, both act on
/// the same coefficients and the result stays trace-consistent.
pub fn project_state(u: &[C64]) -> Vec<C64> {
    u.iter().map(|&z| project_unit_ball(z)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionReport {
    /// `Re w* K (u − w)` with `w = Qu`.
    pub stiffness_value: f64,
    /// `Re a_{ω₀}(w, u − w) = Re (u − w)* S_{ω₀} w`.
    pub shifted_value: f64,
    /// `‖S_{ω₀}‖_max ‖u‖²`, the scale for relative tolerances.
    pub scale: f64,
    pub omega0: f64,
}

impl ProjectionReport {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.stiffness_value >= -rel_tol * self.scale && self.shifted_value >= -rel_tol * self.scale
    }
}

pub fn check_projection_inequality(bundle: &OperatorBundle, u: &[C64]) -> Result<ProjectionReport> {
    if u.len() != bundle.n_total() {
        return Err(Error::DimensionMismatch { expected: bundle.n_total(), got: u.len() });
    }
    let w = project_state(u);
    let rest: Vec<C64> = u.iter().zip(&w).map(|(a, b)| a - b).collect();
    let omega0 = choose_omega0(bundle.beta());
    let s = bundle.shifted_form_matrix(omega0);
    let norm2: f64 = u.iter().map(|x| x.norm_sqr()).sum();
    Ok(ProjectionReport {
        stiffness_value: bundle.stiffness().form(&w, &rest)?.re,
        shifted_value: s.form(&w, &rest)?.re,
        scale: s.norm_max() * norm2,
        omega0,
    })
}
