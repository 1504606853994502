//! Executable checks of the analytic properties of the Wentzell problem:
//! nodal truncation, invariance of convex sets under resolvents, sup-norm
//! contractivity, the Stampacchia stopping lemma, level-set sup-norm
//! certificates, trace constants, density witnesses and the Neumann
//! (submarkovian) case.
//!
//! Findings (a violated inequality) are returned inside reports; only
//! malformed input produces an `Err`.

mod density;
mod invariance;
mod level_set;
mod neumann;
mod projection;
mod stampacchia;
mod trace;

pub use density::{density_witness, domain_relation_defect, DensityOptions, DensityTarget, DensityWitness, WitnessStep};
pub use invariance::{
    invariance_harness, sup_resolvent_bound, ConvexProjection, FnProjection, IdentityProjection, InvarianceReport,
    RealCone, SupResolventReport, UnitBall,
};
pub use level_set::{
    coercivity_constant, linfty_certify, linfty_certify_load, EnergyCheck, Exponents, LevelSetProfile,
    LinftyCertificate,
};
pub use neumann::{neumann_checks, NeumannReport};
pub use projection::{check_projection_inequality, project_state, project_unit_ball, ProjectionReport};
pub use stampacchia::{stampacchia_threshold, StampacchiaInput};
pub use trace::{trace_constant_estimate, trace_ratio, TraceConstantEstimate};

use rand::Rng;
use serde::Serialize;

use crate::fem::OperatorBundle;
use crate::C64;

/// Identification recorded in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportContext {
    pub mesh: String,
    pub beta: String,
    pub seed: Option<u64>,
}

impl ReportContext {
    pub fn new(bundle: &OperatorBundle, seed: Option<u64>) -> Self {
        ReportContext { mesh: bundle.mesh().name().to_string(), beta: bundle.beta().description().to_string(), seed }
    }
}

/// Flattens any serializable report into `key: value` lines; nested keys are
/// joined with dots and array entries indexed.
pub fn key_value_text(report: &impl Serialize) -> String {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut String) {
        use serde_json::Value;
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out);
                }
            }
            Value::Array(items) => {
                for (i, v) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), v, out);
                }
            }
            Value::String(s) => out.push_str(&format!("{prefix}: {s}\n")),
            other => out.push_str(&format!("{prefix}: {other}\n")),
        }
    }
    let value = serde_json::to_value(report).expect("reports serialize");
    let mut out = String::new();
    walk("", &value, &mut out);
    out
}

/// Complex entries with real and imaginary parts uniform in `[-scale, scale]`.
pub(crate) fn random_complex(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale))).collect()
}

pub(crate) fn sup(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}
