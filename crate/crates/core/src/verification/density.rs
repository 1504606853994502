use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::{linfty_certify_load, sup, ReportContext};
use crate::error::{Error, Result};
use crate::fem::{discrete_normal_derivative, BoundaryLoad, OperatorBundle, ProductState};
use crate::mesh::{quality_report, Point, TriMesh};
use crate::operator::{choose_omega0, RobinSolver};
use crate::sparse::lu_factor;
use crate::C64;

/// A twice differentiable closed form `w` with its gradient and Laplacian.
pub struct DensityTarget<'a> {
    pub value: &'a dyn Fn(Point) -> C64,
    pub gradient: &'a dyn Fn(Point) -> [C64; 2],
    pub laplacian: &'a dyn Fn(Point) -> C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityOptions {
    /// Target sup-norm distance `‖u − w‖_∞`.
    pub epsilon: f64,
    pub p: f64,
    pub q: f64,
    /// Resolvent parameter; `ω₀` when `None`.
    pub lambda: Option<f64>,
    /// Initial collar width; an eighth of the shorter bounding-box side when `None`.
    pub r_initial: Option<f64>,
    pub max_iterations: usize,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions { epsilon: 0.05, p: 4.0, q: 4.0, lambda: None, r_initial: None, max_iterations: 30 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessStep {
    pub r: f64,
    pub achieved_error: f64,
    pub certified_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityWitness {
    pub context: ReportContext,
    pub lambda: f64,
    pub epsilon: f64,
    pub r_final: f64,
    pub iterations: usize,
    /// `‖u − I_h w‖_∞`
    pub achieved_error: f64,
    /// Level-set certificate for `‖u − I_h w‖_∞`.
    pub certified_bound: f64,
    pub target_met: bool,
    pub certified_target_met: bool,
    /// Stopped because the collar width fell below the mesh size.
    pub floor_reached: bool,
    pub history: Vec<WitnessStep>,
    #[serde(skip)]
    pub u: ProductState,
    /// Nodal values of the interior data `Φ`; its boundary trace is the
    /// Robin data, so `u` lies in the discrete Wentzell domain.
    #[serde(skip)]
    pub interior_data: Vec<C64>,
}

fn segment_distance(x: Point, a: Point, b: Point) -> (f64, Point) {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    let p = [a[0] + t * d[0], a[1] + t * d[1]];
    (((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2)).sqrt(), p)
}

/// Distance to the boundary, nearest boundary point and its edge, per vertex.
fn nearest_boundary(mesh: &TriMesh) -> Vec<(f64, Point, usize)> {
    let v = mesh.vertices();
    let edges = mesh.boundary_edges();
    v.iter()
        .map(|&x| {
            let mut best = (f64::INFINITY, x, 0);
            for (k, e) in edges.iter().enumerate() {
                let (d, p) = segment_distance(x, v[e.nodes[0]], v[e.nodes[1]]);
                if d < best.0 {
                    best = (d, p, k);
                }
            }
            best
        })
        .collect()
}

/// Collar profile: 1 within `r/2` of the boundary, `cos²` down to 0 at `r`.
fn collar(d: f64, r: f64) -> f64 {
    let t = d / r;
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        (PI * (t - 0.5)).cos().powi(2)
    }
}

/// Builds `u` in the discrete Wentzell domain close to `I_h w` in sup norm.
///
/// With collar weight `ψ` and `g = ∂_ν w + (β + λ) w` on the boundary, the
/// data `Φ = (1 − ψ)(λw − Δw) + ψ g(nearest boundary point)` is smooth away
/// from corners, equals `g` on the boundary and `λw − Δw` outside the
/// collar. The Robin problem with interior data `Φ` and boundary data `Φ|_Γ`
/// has a solution satisfying the Wentzell relation. The collar width is
/// halved until the level-set certificate of `u − I_h w` drops below `ε` or
/// the width falls below the smallest mesh edge.
pub fn density_witness(bundle: &OperatorBundle, target: &DensityTarget, options: DensityOptions) -> Result<DensityWitness> {
    if !(options.epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be > 0, got {}", options.epsilon)));
    }
    let mesh = bundle.mesh();
    let v = mesh.vertices();
    let n = bundle.n_total();
    let lambda = options.lambda.unwrap_or_else(|| choose_omega0(bundle.beta()));
    let solver = RobinSolver::new(Arc::new(bundle.clone()), lambda)?;
    let beta = bundle.beta().values();
    let edges = mesh.boundary_edges();

    let edge_data = |x: Point, k: usize| {
        let nrm = mesh.outward_normal(&edges[k]);
        let g = (target.gradient)(x);
        g[0] * nrm[0] + g[1] * nrm[1] + (beta[k] + lambda) * (target.value)(x)
    };
    // corner nodes average the data of their two edges
    let mut nodal_g = vec![C64::new(0.0, 0.0); n];
    let mut count = vec![0u32; n];
    for (k, e) in edges.iter().enumerate() {
        for &i in &e.nodes {
            nodal_g[i] += edge_data(v[i], k);
            count[i] += 1;
        }
    }
    for (g, c) in nodal_g.iter_mut().zip(&count) {
        if *c > 0 {
            *g /= *c as f64;
        }
    }
    let near = nearest_boundary(mesh);
    let interior: Vec<C64> = v.iter().map(|&x| lambda * (target.value)(x) - (target.laplacian)(x)).collect();
    let w: Vec<C64> = v.iter().map(|&x| (target.value)(x)).collect();

    let (xmin, xmax, ymin, ymax) = v.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), p| (a.min(p[0]), b.max(p[0]), c.min(p[1]), d.max(p[1])),
    );
    let h_min = quality_report(mesh).h_min;
    let mut r = options.r_initial.unwrap_or(0.125 * (xmax - xmin).min(ymax - ymin));

    let mut history = Vec::new();
    loop {
        let phi: Vec<C64> = (0..n)
            .map(|i| {
                if count[i] > 0 {
                    return nodal_g[i];
                }
                let (d, p, k) = near[i];
                let psi = collar(d, r);
                interior[i] * (1.0 - psi) + edge_data(p, k) * psi
            })
            .collect();
        let g = BoundaryLoad::Nodal(bundle.restrict_to_boundary(&phi));
        let u = solver.solve(&phi, &g)?;
        let e: Vec<C64> = u.coeffs().iter().zip(&w).map(|(a, b)| a - b).collect();
        let achieved_error = sup(&e);
        let load = solver.system_matrix().spmv(&e)?;
        let cert = linfty_certify_load(bundle, lambda, &e, &load, options.p, options.q)?;
        history.push(WitnessStep { r, achieved_error, certified_bound: cert.t0 });

        let certified_target_met = cert.t0 <= options.epsilon;
        let floor_reached = !certified_target_met && r / 2.0 < h_min;
        if certified_target_met || floor_reached || history.len() >= options.max_iterations {
            return Ok(DensityWitness {
                context: ReportContext::new(bundle, None),
                lambda,
                epsilon: options.epsilon,
                r_final: r,
                iterations: history.len(),
                achieved_error,
                certified_bound: cert.t0,
                target_met: achieved_error <= options.epsilon,
                certified_target_met,
                floor_reached,
                history,
                u,
                interior_data: phi,
            });
        }
        r /= 2.0;
    }
}

/// Boundary `L²` norm of `h + B_ΓΓ⁻¹ (B_β u)|_Γ + (Δu)|_Γ` where `Δu = λu − Φ`
/// and `h` is the Green-formula normal derivative.
pub fn domain_relation_defect(bundle: &OperatorBundle, lambda: f64, u: &ProductState, phi: &[C64]) -> Result<f64> {
    let lap: Vec<C64> = u.coeffs().iter().zip(phi).map(|(a, b)| a * lambda - b).collect();
    let h = discrete_normal_derivative(bundle, u, &lap)?;
    let block = bundle.boundary_block();
    let bu = bundle.restrict_to_boundary(&bundle.beta_mass().spmv(u.coeffs())?);
    let beta_term = lu_factor(&block)?.solve(&bu)?;
    let lap_g = bundle.restrict_to_boundary(&lap);
    let r: Vec<C64> = h.iter().zip(&beta_term).zip(&lap_g).map(|((a, b), c)| a + b + c).collect();
    Ok(block.form(&r, &r)?.re.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, BoundaryCoefficient, MassLumping};
    use crate::mesh::generate_rectangle;

    fn bundle(n: usize, beta: C64) -> OperatorBundle {
        let m = generate_rectangle(1.0, 1.0, n, n).unwrap();
        assemble(&m, &BoundaryCoefficient::constant(&m, beta), MassLumping::Lumped).unwrap()
    }

    #[test]
    fn constant_is_recovered() {
        let b = bundle(8, C64::new(0.0, 0.0));
        let value = |_: Point| C64::new(2.0, -1.0);
        let gradient = |_: Point| [C64::new(0.0, 0.0); 2];
        let laplacian = |_: Point| C64::new(0.0, 0.0);
        let t = DensityTarget { value: &value, gradient: &gradient, laplacian: &laplacian };
        let wit = density_witness(&b, &t, DensityOptions { epsilon: 1e-6, ..Default::default() }).unwrap();
        assert!(wit.achieved_error < 1e-12, "{}", wit.achieved_error);
        assert!(wit.target_met);
    }

    #[test]
    fn loose_tolerance_stops_immediately() {
        let b = bundle(8, C64::new(1.0, 1.0));
        let value = |p: Point| C64::new(p[0], 0.0);
        let gradient = |_: Point| [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let laplacian = |_: Point| C64::new(0.0, 0.0);
        let t = DensityTarget { value: &value, gradient: &gradient, laplacian: &laplacian };
        let wit = density_witness(&b, &t, DensityOptions { epsilon: 1e3, r_initial: Some(0.2), ..Default::default() }).unwrap();
        assert_eq!(wit.iterations, 1);
        assert_eq!(wit.r_final, 0.2);
        let defect = domain_relation_defect(&b, wit.lambda, &wit.u, &wit.interior_data).unwrap();
        assert!(defect < 1e-9, "{defect}");
    }

    #[test]
    fn collar_profile() {
        assert_eq!(collar(0.0, 1.0), 1.0);
        assert_eq!(collar(0.5, 1.0), 1.0);
        assert!((collar(0.75, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(collar(1.0, 1.0), 0.0);
    }
}
