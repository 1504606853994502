use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{random_complex, ReportContext};
use crate::error::{Error, Result};
use crate::fem::OperatorBundle;
use crate::sparse::lu_factor;
use crate::C64;

const RANDOM_SAMPLES: usize = 500;
const ASCENT_ITERATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceConstantEstimate {
    pub context: ReportContext,
    pub s: f64,
    /// Largest observed `‖u_Γ‖_{L^s(Γ)} / ‖u‖_{H¹(Ω)}`.
    pub c1: f64,
    pub random_best: f64,
    pub ascent_best: f64,
    #[serde(skip)]
    pub maximizer: Vec<C64>,
}

/// `‖u_Γ‖_{L^s(Γ)} / ‖u‖_{H¹(Ω)}`, the boundary norm by lumped nodal quadrature.
pub fn trace_ratio(bundle: &OperatorBundle, u: &[C64], s: f64) -> f64 {
    let weights = boundary_weights(bundle);
    ratio(bundle, &weights, u, s)
}

fn boundary_weights(bundle: &OperatorBundle) -> Vec<(usize, f64)> {
    let sums = bundle.boundary_mass().row_sums();
    bundle.boundary_nodes().iter().map(|&i| (i, sums[i].re)).collect()
}

fn ratio(bundle: &OperatorBundle, weights: &[(usize, f64)], u: &[C64], s: f64) -> f64 {
    let num: f64 = weights.iter().map(|&(i, w)| w * u[i].norm().powf(s)).sum::<f64>().powf(1.0 / s);
    let den = bundle.h1_norm(u);
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Estimates the trace constant `c₁` in `‖u_Γ‖_{L^s} ≤ c₁ ‖u‖_{H¹}` from below:
/// the best of 500 random complex vectors and of 50 fixed-point ascent steps
/// `u ← (K + M)⁻¹ ∇(Σ b_i |u_i|^s)` started from the constant.
pub fn trace_constant_estimate(bundle: &OperatorBundle, s: f64, seed: u64) -> Result<TraceConstantEstimate> {
    if !(s >= 2.0) || !s.is_finite() {
        return Err(Error::invalid(format!("trace exponent must be >= 2, got {s}")));
    }
    let n = bundle.n_total();
    let weights = boundary_weights(bundle);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_best: f64 = 0.0;
    let mut maximizer = vec![C64::new(1.0, 0.0); n];
    for _ in 0..RANDOM_SAMPLES {
        let u = random_complex(&mut rng, n, 1.0);
        let r = ratio(bundle, &weights, &u, s);
        if r > random_best {
            random_best = r;
            maximizer = u;
        }
    }

    let lu = lu_factor(&bundle.h1_gram())?;
    let mut u = vec![C64::new(1.0, 0.0); n];
    let mut ascent_best = ratio(bundle, &weights, &u, s);
    let mut ascent_arg = u.clone();
    for _ in 0..ASCENT_ITERATIONS {
        let mut grad = vec![C64::new(0.0, 0.0); n];
        for &(i, w) in &weights {
            let r = u[i].norm();
            if r > 0.0 {
                grad[i] = u[i] * (w * r.powf(s - 2.0));
            }
        }
        let next = lu.solve(&grad)?;
        let norm = bundle.h1_norm(&next);
        if norm == 0.0 {
            break;
        }
        u = next.iter().map(|v| v / norm).collect();
        let r = ratio(bundle, &weights, &u, s);
        if r > ascent_best {
            ascent_best = r;
            ascent_arg = u.clone();
        }
    }
    if ascent_best >= random_best {
        maximizer = ascent_arg;
    }
    Ok(TraceConstantEstimate {
        context: ReportContext::new(bundle, Some(seed)),
        s,
        c1: random_best.max(ascent_best),
        random_best,
        ascent_best,
        maximizer,
    })
}
