use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{sup_resolvent_bound, ReportContext};
use crate::error::Result;
use crate::fem::{assemble_neumann, MassLumping, ProductState};
use crate::mesh::{quality_report, TriMesh};
use crate::operator::{Stepper, Scheme, WentzellOperator};
use crate::C64;

const SAMPLES: usize = 20;
const LAMBDA: f64 = 1.0;
const DT: f64 = 0.01;

pub const EQUILIBRIUM_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-12;
pub const CONTRACTION_TOL: f64 = 1e-10;

/// Submarkovian checks for the Neumann Laplacian (no boundary mass, no β).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeumannReport {
    pub context: ReportContext,
    pub nonobtuse: bool,
    /// `max |S(dt) 𝟙 − 𝟙|`
    pub equilibrium_defect: f64,
    /// Smallest real part of `(λ + A)⁻¹ h` over nonnegative `h`.
    pub min_resolvent_value: f64,
    /// Largest `|Im|` of the same resolvents.
    pub max_imaginary: f64,
    /// `max ‖λ(λ + A)⁻¹ h‖_∞ / ‖h‖_∞`
    pub sup_ratio: f64,
    pub equilibrium_ok: bool,
    pub positivity_ok: bool,
    pub contraction_ok: bool,
}

impl NeumannReport {
    pub fn passed(&self) -> bool {
        self.equilibrium_ok && self.positivity_ok && self.contraction_ok
    }
}

/// Builds the lumped Neumann operator on `mesh` and checks conservation of
/// constants, positivity of resolvents (node indicators and random
/// nonnegative data) and sup-norm contractivity at `λ = 1`.
pub fn neumann_checks(mesh: &TriMesh, seed: u64) -> Result<NeumannReport> {
    let bundle = assemble_neumann(mesh, MassLumping::Lumped)?;
    let op = WentzellOperator::new(bundle);
    let n = op.bundle().n_total();

    let one = ProductState::constant(op.bundle(), C64::new(1.0, 0.0));
    let stepped = Stepper::new(&op, Scheme::ImplicitEuler, DT)?.step(&one)?;
    let equilibrium_defect = stepped.coeffs().iter().map(|v| (v - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max);

    let res = op.resolvent(LAMBDA)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data: Vec<Vec<C64>> = (0..SAMPLES.min(n))
        .map(|k| {
            let mut h = vec![C64::new(0.0, 0.0); n];
            h[k * n / SAMPLES.min(n)] = C64::new(1.0, 0.0);
            h
        })
        .collect();
    data.extend((0..SAMPLES).map(|_| (0..n).map(|_| C64::new(rng.gen_range(0.0..1.0), 0.0)).collect::<Vec<_>>()));
    let mut min_resolvent_value = f64::INFINITY;
    let mut max_imaginary: f64 = 0.0;
    for h in data {
        let u = res.apply(&op.state(h)?)?;
        for v in u.coeffs() {
            min_resolvent_value = min_resolvent_value.min(v.re);
            max_imaginary = max_imaginary.max(v.im.abs());
        }
    }

    let sup = sup_resolvent_bound(&op, &[LAMBDA], SAMPLES, seed)?;
    Ok(NeumannReport {
        context: ReportContext::new(op.bundle(), Some(seed)),
        nonobtuse: quality_report(mesh).is_nonobtuse,
        equilibrium_defect,
        min_resolvent_value,
        max_imaginary,
        sup_ratio: sup.max_ratio,
        equilibrium_ok: equilibrium_defect <= EQUILIBRIUM_TOL,
        positivity_ok: min_resolvent_value >= -POSITIVITY_TOL && max_imaginary <= POSITIVITY_TOL,
        contraction_ok: sup.max_ratio <= 1.0 + CONTRACTION_TOL,
    })
}
