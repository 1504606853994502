use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};
use crate::C64;

/// Complex β ∈ L∞(Γ), constant on each boundary edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCoefficient {
    values: Vec<C64>,
    description: String,
}

impl BoundaryCoefficient {
    pub fn new(values: Vec<C64>, description: impl Into<String>) -> Result<Self> {
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("beta values must be finite"));
        }
        Ok(BoundaryCoefficient { values, description: description.into() })
    }

    pub fn constant(mesh: &TriMesh, value: C64) -> Self {
        BoundaryCoefficient {
            values: vec![value; mesh.boundary_edges().len()],
            description: format!("constant {}", format_complex(value)),
        }
    }

    /// One constant per arc label; labels absent from `arcs` get `default`.
    /// Every key of `arcs` must be an arc of the mesh.
    pub fn per_arc(mesh: &TriMesh, arcs: &BTreeMap<u32, C64>, default: C64) -> Result<Self> {
        let labels = mesh.arc_labels();
        if let Some(bad) = arcs.keys().find(|l| !labels.contains(l)) {
            return Err(Error::invalid(format!("arc label {bad} does not exist in the mesh (arcs: {labels:?})")));
        }
        let values = mesh.boundary_edges().iter().map(|e| arcs.get(&e.label).copied().unwrap_or(default)).collect();
        let parts: Vec<String> = arcs.iter().map(|(l, v)| format!("{l}:{}", format_complex(*v))).collect();
        Self::new(values, format!("per-arc {{{}}} default {}", parts.join(", "), format_complex(default)))
    }

    /// Samples a closed form at edge midpoints.
    pub fn from_fn(mesh: &TriMesh, f: impl Fn(Point) -> C64) -> Self {
        let values = mesh.boundary_edges().iter().map(|e| f(mesh.edge_midpoint(e))).collect();
        BoundaryCoefficient { values, description: "midpoint-sampled expression".into() }
    }

    pub fn with_description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into();
        self
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `min Re β` over edges.
    pub fn ess_inf_re(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    /// `max |Im β|` over edges.
    pub fn sup_abs_im(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }
}

pub(crate) fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_rectangle;

    #[test]
    fn derived_quantities() {
        let m = generate_rectangle(1.0, 1.0, 2, 2).unwrap();
        let mut arcs = BTreeMap::new();
        arcs.insert(0, C64::new(-3.0, 1.0));
        arcs.insert(2, C64::new(2.0, -5.0));
        let b = BoundaryCoefficient::per_arc(&m, &arcs, C64::new(0.5, 0.0)).unwrap();
        assert_eq!(b.len(), 8);
        assert_eq!(b.ess_inf_re(), -3.0);
        assert_eq!(b.sup_abs_im(), 5.0);
        assert!((b.sup_abs() - 29f64.sqrt()).abs() < 1e-15);
        assert!(!b.is_real());
    }

    #[test]
    fn unknown_arc_is_rejected() {
        let m = generate_rectangle(1.0, 1.0, 2, 2).unwrap();
        let mut arcs = BTreeMap::new();
        arcs.insert(7, C64::new(1.0, 0.0));
        assert!(BoundaryCoefficient::per_arc(&m, &arcs, C64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn midpoint_sampling() {
        let m = generate_rectangle(1.0, 1.0, 1, 1).unwrap();
        let b = BoundaryCoefficient::from_fn(&m, |p| C64::new(p[0], p[1]));
        for (e, v) in m.boundary_edges().iter().zip(b.values()) {
            let mid = m.edge_midpoint(e);
            assert_eq!(*v, C64::new(mid[0], mid[1]));
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(BoundaryCoefficient::new(vec![C64::new(f64::NAN, 0.0)], "x").is_err());
    }
}
