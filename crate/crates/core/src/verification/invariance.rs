use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{random_complex, sup, ReportContext};
use crate::error::{Error, Result};
use crate::fem::ProductState;
use crate::operator::WentzellOperator;
use crate::C64;

/// A projection onto a closed convex set of nodal vectors.
pub trait ConvexProjection {
    fn name(&self) -> &str;
    fn project(&self, u: &[C64]) -> Vec<C64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityProjection;

impl ConvexProjection for IdentityProjection {
    fn name(&self) -> &str {
        "identity"
    }

    fn project(&self, u: &[C64]) -> Vec<C64> {
        u.to_vec()
    }
}

/// `{|u_i| ≤ 1}` on all nodes, interior and boundary alike.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitBall;

impl ConvexProjection for UnitBall {
    fn name(&self) -> &str {
        "unit-ball"
    }

    fn project(&self, u: &[C64]) -> Vec<C64> {
        super::project_state(u)
    }
}

/// Real nonnegative vectors, projection `(Re u)⁺`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RealCone;

impl ConvexProjection for RealCone {
    fn name(&self) -> &str {
        "real-cone"
    }

    fn project(&self, u: &[C64]) -> Vec<C64> {
        u.iter().map(|z| C64::new(z.re.max(0.0), 0.0)).collect()
    }
}

/// User-supplied projection.
pub struct FnProjection<F> {
    name: String,
    f: F,
}

impl<F: Fn(&[C64]) -> Vec<C64>> FnProjection<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnProjection { name: name.into(), f }
    }
}

impl<F: Fn(&[C64]) -> Vec<C64>> ConvexProjection for FnProjection<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn project(&self, u: &[C64]) -> Vec<C64> {
        (self.f)(u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub context: ReportContext,
    pub projection: String,
    pub shift: f64,
    pub samples: usize,
    /// `(λ, max_h ‖P x − x‖_∞)` with `x = λ(λ + A)⁻¹ P h`.
    pub violations: Vec<(f64, f64)>,
    pub max_violation: f64,
}

/// Checks `λ(λ + A)⁻¹ C ⊂ C` on random samples for the operator as given
/// (pass a shifted operator to test `A + ω₀`).
pub fn invariance_harness(
    op: &WentzellOperator,
    projection: &dyn ConvexProjection,
    lambdas: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    let n = op.bundle().n_total();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<C64>> = (0..n_samples)
        .map(|_| {
            let h = random_complex(&mut rng, n, 2.0);
            let ph = projection.project(&h);
            let again = projection.project(&ph);
            let defect = sup(&ph.iter().zip(&again).map(|(a, b)| a - b).collect::<Vec<_>>());
            if defect > 1e-12 * (1.0 + sup(&ph)) {
                return Err(Error::invalid(format!(
                    "projection '{}' is not idempotent (defect {defect:.3e})",
                    projection.name()
                )));
            }
            Ok(ph)
        })
        .collect::<Result<_>>()?;

    let mut violations = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
        }
        let res = op.resolvent(lambda)?;
        let mut worst: f64 = 0.0;
        for ph in &samples {
            let x = res.apply_scaled(&op.state(ph.clone())?)?;
            let px = projection.project(x.coeffs());
            let d = sup(&px.iter().zip(x.coeffs()).map(|(a, b)| a - b).collect::<Vec<_>>());
            worst = worst.max(d);
        }
        violations.push((lambda, worst));
    }
    let max_violation = violations.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok(InvarianceReport {
        context: ReportContext::new(op.bundle(), Some(seed)),
        projection: projection.name().to_string(),
        shift: op.shift(),
        samples: n_samples,
        violations,
        max_violation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupResolventReport {
    pub context: ReportContext,
    pub shift: f64,
    pub samples: usize,
    /// `(λ, max_h ‖λ(λ + A)⁻¹ h‖_∞ / ‖h‖_∞)`.
    pub ratios: Vec<(f64, f64)>,
    pub max_ratio: f64,
}

impl SupResolventReport {
    /// `max(ratio − 1, 0)`.
    pub fn defect(&self) -> f64 {
        (self.max_ratio - 1.0).max(0.0)
    }
}

/// Largest sup-norm amplification of `λ(λ + A)⁻¹` over random data, for the
/// operator as given. Even-numbered samples are real `±1` vectors, odd ones
/// complex with entries in the unit square.
pub fn sup_resolvent_bound(op: &WentzellOperator, lambdas: &[f64], n_samples: usize, seed: u64) -> Result<SupResolventReport> {
    let n = op.bundle().n_total();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<C64>> = (0..n_samples)
        .map(|k| {
            if k % 2 == 0 {
                (0..n).map(|_| C64::new(if rng.gen_bool(0.5) { 1.0 } else { -1.0 }, 0.0)).collect()
            } else {
                random_complex(&mut rng, n, 1.0)
            }
        })
        .collect();
    let mut ratios = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
        }
        let res = op.resolvent(lambda)?;
        let mut worst: f64 = 0.0;
        for h in &samples {
            let hs = sup(h);
            if hs == 0.0 {
                continue;
            }
            let x = res.apply_scaled(&ProductState::new(op.bundle(), h.clone())?)?;
            worst = worst.max(x.sup_norm() / hs);
        }
        ratios.push((lambda, worst));
    }
    let max_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(SupResolventReport {
        context: ReportContext::new(op.bundle(), Some(seed)),
        shift: op.shift(),
        samples: n_samples,
        ratios,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, assemble_neumann, BoundaryCoefficient, MassLumping};
    use crate::mesh::generate_rectangle;

    fn wentzell(n: usize, beta: C64) -> WentzellOperator {
        let m = generate_rectangle(1.0, 1.0, n, n).unwrap();
        WentzellOperator::new(assemble(&m, &BoundaryCoefficient::constant(&m, beta), MassLumping::Lumped).unwrap())
    }

    #[test]
    fn identity_is_invariant() {
        let op = wentzell(4, C64::new(1.0, 1.0));
        let r = invariance_harness(&op, &IdentityProjection, &[1.0, 10.0], 5, 1).unwrap();
        assert_eq!(r.max_violation, 0.0);
    }

    #[test]
    fn unit_ball_invariant_after_shift() {
        let op = wentzell(8, C64::new(-1.0, 2.0)).shifted();
        let r = invariance_harness(&op, &UnitBall, &[1.0, 10.0, 100.0], 10, 2).unwrap();
        assert!(r.max_violation <= 5e-3, "{r:?}");
    }

    #[test]
    fn real_cone_invariant_for_neumann() {
        let m = generate_rectangle(1.0, 1.0, 8, 8).unwrap();
        let op = WentzellOperator::new(assemble_neumann(&m, MassLumping::Lumped).unwrap());
        let r = invariance_harness(&op, &RealCone, &[1.0, 10.0], 10, 3).unwrap();
        assert!(r.max_violation <= 1e-12, "{r:?}");
    }

    #[test]
    fn non_idempotent_projection_rejected() {
        let op = wentzell(3, C64::new(0.0, 0.0));
        let halve = FnProjection::new("halve", |u: &[C64]| u.iter().map(|z| z * 0.5).collect());
        assert!(matches!(invariance_harness(&op, &halve, &[1.0], 2, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn equilibrium_ratio_is_one() {
        // β = 0 and no shift: constants are fixed by λ(λ + A)⁻¹
        let op = wentzell(6, C64::new(0.0, 0.0));
        let res = op.resolvent(3.0).unwrap();
        let one = ProductState::constant(op.bundle(), C64::new(1.0, 0.0));
        let x = res.apply_scaled(&one).unwrap();
        assert!((x.sup_norm() - 1.0).abs() < 1e-13);
        let r = sup_resolvent_bound(&op, &[1.0, 50.0], 6, 4).unwrap();
        assert!(r.max_ratio <= 1.0 + 1e-10);
    }
}
