use serde::Serialize;

use crate::error::{Error, Result};

/// Data of the stopping lemma: a non-increasing `φ ≥ 0` with
/// `φ(h) ≤ c_φ (h − k)^{−α} φ(k)^δ` for all `0 ≤ k < h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StampacchiaInput {
    pub c_phi: f64,
    pub alpha: f64,
    pub delta: f64,
    pub phi0: f64,
}

impl StampacchiaInput {
    pub fn new(c_phi: f64, alpha: f64, delta: f64, phi0: f64) -> Result<Self> {
        let input = StampacchiaInput { c_phi, alpha, delta, phi0 };
        input.validate()?;
        Ok(input)
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 1.0) || !self.delta.is_finite() {
            return Err(Error::invalid(format!("delta must be > 1, got {}", self.delta)));
        }
        if !(self.c_phi > 0.0) || !(self.alpha > 0.0) || !(self.phi0 >= 0.0) {
            return Err(Error::invalid(format!(
                "need c_phi > 0, alpha > 0, phi0 >= 0 (got {}, {}, {})",
                self.c_phi, self.alpha, self.phi0
            )));
        }
        Ok(())
    }

    /// `γ = −1/(δ − 1)`.
    pub fn gamma(&self) -> f64 {
        -1.0 / (self.delta - 1.0)
    }

    /// `t₀ = c^{1/α} φ(0)^{(δ−1)/α} 2^{δ/(δ−1)}`.
    pub fn threshold(&self) -> Result<f64> {
        stampacchia_threshold(*self)
    }

    /// `k_m = (1 − 2^{−m}) t₀` for `m = 0..=m_max`.
    pub fn levels(&self, m_max: usize) -> Result<Vec<f64>> {
        let t0 = self.threshold()?;
        Ok((0..=m_max).map(|m| (1.0 - 0.5f64.powi(m as i32)) * t0).collect())
    }

    /// `2^{mαγ} φ(0)`, the bound on `φ(k_m)` from the induction.
    pub fn decay_bound(&self, m: usize) -> f64 {
        self.decay_bound_log2(m).exp2()
    }

    /// `log₂` of [`Self::decay_bound`]; stays finite where the bound underflows.
    pub fn decay_bound_log2(&self, m: usize) -> f64 {
        m as f64 * self.alpha * self.gamma() + self.phi0.log2()
    }

    /// `φ(k_m)` for `m = 0..=m_max` when every step of the hypothesis holds
    /// with equality: `φ(k_{m+1}) = c (k_{m+1} − k_m)^{−α} φ(k_m)^δ`.
    pub fn simulate_recursion(&self, m_max: usize) -> Result<Vec<f64>> {
        Ok(self.simulate_recursion_log2(m_max)?.into_iter().map(f64::exp2).collect())
    }

    /// `log₂ φ(k_m)` of the equality recursion.
    ///
    /// The ratio `r_m = φ(k_m) / (2^{mαγ} φ(0))` obeys `r_{m+1} = r_m^δ`, so the
    /// exact solution `r ≡ 1` is an unstable fixed point and an upward
    /// rounding error grows like `δ^m`. Each step subtracts a bound on its own
    /// rounding error, which keeps the computed sequence at or below the exact one.
    pub fn simulate_recursion_log2(&self, m_max: usize) -> Result<Vec<f64>> {
        let t0 = self.threshold()?;
        let mut out = Vec::with_capacity(m_max + 1);
        out.push(self.phi0.log2());
        if self.phi0 == 0.0 {
            out.resize(m_max + 1, f64::NEG_INFINITY);
            return Ok(out);
        }
        let (lc, lt) = (self.c_phi.log2(), t0.log2());
        for m in 0..m_max {
            // log₂ gap = log₂ t₀ − (m + 1)
            let a = lc - self.alpha * (lt - (m + 1) as f64);
            let b = self.delta * out[m];
            let slack = 8.0 * f64::EPSILON * (1.0 + lc.abs() + self.alpha * (lt.abs() + (m + 1) as f64) + b.abs());
            out.push(a + b - slack);
        }
        Ok(out)
    }
}

pub fn stampacchia_threshold(input: StampacchiaInput) -> Result<f64> {
    input.validate()?;
    let StampacchiaInput { c_phi, alpha, delta, phi0 } = input;
    Ok(c_phi.powf(1.0 / alpha) * phi0.powf((delta - 1.0) / alpha) * (delta / (delta - 1.0)).exp2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        assert_eq!(stampacchia_threshold(StampacchiaInput { c_phi: 1.0, alpha: 1.0, delta: 2.0, phi0: 1.0 }).unwrap(), 4.0);
        assert_eq!(stampacchia_threshold(StampacchiaInput { c_phi: 16.0, alpha: 2.0, delta: 2.0, phi0: 1.0 }).unwrap(), 16.0);
    }

    #[test]
    fn delta_must_exceed_one() {
        assert!(StampacchiaInput::new(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(stampacchia_threshold(StampacchiaInput { c_phi: 1.0, alpha: 1.0, delta: 0.5, phi0: 1.0 }).is_err());
    }

    #[test]
    fn zero_phi0_gives_zero_threshold() {
        assert_eq!(StampacchiaInput::new(3.0, 2.0, 3.0, 0.0).unwrap().threshold().unwrap(), 0.0);
    }

    #[test]
    fn levels_approach_threshold() {
        let s = StampacchiaInput::new(1.0, 1.0, 2.0, 1.0).unwrap();
        let k = s.levels(3).unwrap();
        assert_eq!(k, vec![0.0, 2.0, 3.0, 3.5]);
    }

    #[test]
    fn equality_recursion_meets_bound() {
        let s = StampacchiaInput::new(2.0, 2.0, 1.5, 0.7).unwrap();
        let phi = s.simulate_recursion_log2(60).unwrap();
        for (m, p) in phi.iter().enumerate() {
            assert!(*p <= s.decay_bound_log2(m) + 1e-12 * (1.0 + p.abs()), "m = {m}");
        }
        assert!(phi[60] < 1e-12f64.log2());
        // close to equality early on
        assert!((phi[3] - s.decay_bound_log2(3)).abs() < 1e-9);
    }
}
