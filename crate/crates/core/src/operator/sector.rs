use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::WentzellOperator;
use crate::error::{Error, Result};
use crate::C64;

/// Numerical-range sector of the shifted form `u* S_ω u` over random samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorEstimate {
    pub omega: f64,
    /// Largest `|arg(u* S_ω u)|` seen.
    pub theta: f64,
    pub samples: usize,
}

/// Samples `n_samples` random complex nodal vectors (uniform entries in the
/// unit square) and records the largest argument of `u* S_ω u`, where
/// `S_ω = K + B_β + ωG` is formed from the operator's bundle.
pub fn sector_estimate(op: &WentzellOperator, omega: f64, n_samples: usize, seed: u64) -> Result<SectorEstimate> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be >= 1"));
    }
    let s = op.bundle().shifted_form_matrix(omega);
    let n = s.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta: f64 = 0.0;
    for _ in 0..n_samples {
        let u: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let value = s.form(&u, &u)?;
        let norm2: f64 = u.iter().map(|x| x.norm_sqr()).sum();
        let tol = 1e-12 * s.norm_max() * norm2;
        if value.re < -tol {
            return Err(Error::SectorViolation { re: value.re, tol, witness: u });
        }
        if value.norm() > 0.0 {
            theta = theta.max(value.arg().abs());
        }
    }
    Ok(SectorEstimate { omega, theta, samples: n_samples })
}
