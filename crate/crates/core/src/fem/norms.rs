//! Error norms of P1 functions against closed forms, by quadrature.

use crate::mesh::{Point, TriMesh};
use crate::C64;

/// Degree-5 seven-point rule on the reference triangle: (barycentric, weight),
/// weights summing to one.
const TRI_RULE: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_770;
    const B1: f64 = 0.470_142_064_105_115;
    const W1: f64 = 0.132_394_152_788_506;
    const A2: f64 = 0.797_426_985_353_087;
    const B2: f64 = 0.101_286_507_323_456;
    const W2: f64 = 0.125_939_180_544_827;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Three-point Gauss–Legendre on [0, 1].
const LINE_RULE: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

fn p1_gradient(p: [Point; 3], vals: [C64; 3]) -> [C64; 2] {
    let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let mut g = [C64::new(0.0, 0.0); 2];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[0] += vals[i] * ((p[j][1] - p[k][1]) / area2);
        g[1] += vals[i] * ((p[k][0] - p[j][0]) / area2);
    }
    g
}

/// `‖u_h − u‖_{L²(Ω)}`.
pub fn l2_error(mesh: &TriMesh, u: &[C64], exact: impl Fn(Point) -> C64) -> f64 {
    let v = mesh.vertices();
    let mut acc = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        for (bary, w) in TRI_RULE {
            let x = [0, 1].map(|d| (0..3).map(|i| bary[i] * v[tri[i]][d]).sum::<f64>());
            let uh: C64 = (0..3).map(|i| u[tri[i]] * bary[i]).sum();
            acc += w * area * (uh - exact(x)).norm_sqr();
        }
    }
    acc.sqrt()
}

/// `‖∇u_h − ∇u‖_{L²(Ω)}`.
pub fn h1_seminorm_error(mesh: &TriMesh, u: &[C64], grad: impl Fn(Point) -> [C64; 2]) -> f64 {
    let v = mesh.vertices();
    let mut acc = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        let pts = [v[tri[0]], v[tri[1]], v[tri[2]]];
        let gh = p1_gradient(pts, [u[tri[0]], u[tri[1]], u[tri[2]]]);
        for (bary, w) in TRI_RULE {
            let x = [0, 1].map(|d| (0..3).map(|i| bary[i] * pts[i][d]).sum::<f64>());
            let g = grad(x);
            acc += w * area * ((gh[0] - g[0]).norm_sqr() + (gh[1] - g[1]).norm_sqr());
        }
    }
    acc.sqrt()
}

/// `‖h − g‖_{L²(Γ)}` for boundary nodal values `h` (ascending boundary node
/// order) against `g(point, outward normal)`, which may jump at corners.
pub fn boundary_l2_error(
    mesh: &TriMesh,
    boundary_nodes: &[usize],
    h: &[C64],
    exact: impl Fn(Point, [f64; 2]) -> C64,
) -> f64 {
    let v = mesh.vertices();
    let pos = |node: usize| boundary_nodes.binary_search(&node).expect("boundary node");
    let mut acc = 0.0;
    for e in mesh.boundary_edges() {
        let [a, b] = e.nodes;
        let (ha, hb) = (h[pos(a)], h[pos(b)]);
        let len = mesh.edge_length(e);
        let n = mesh.outward_normal(e);
        for (s, w) in LINE_RULE {
            let x = [v[a][0] + s * (v[b][0] - v[a][0]), v[a][1] + s * (v[b][1] - v[a][1])];
            let hs = ha * (1.0 - s) + hb * s;
            acc += w * len * (hs - exact(x, n)).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Nodal quadrature of `(Σ w_i |f_i|^p)^{1/p}`; `p = ∞` gives the max norm.
pub fn weighted_lp_norm(weights: &[f64], values: &[C64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().zip(weights).filter(|(_, &w)| w > 0.0).map(|(v, _)| v.norm()).fold(0.0, f64::max);
    }
    values.iter().zip(weights).map(|(v, w)| w * v.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Observed convergence order `log(e_coarse / e_fine) / log(h_coarse / h_fine)`.
pub fn observed_order(e_coarse: f64, e_fine: f64, refinement: f64) -> f64 {
    (e_coarse / e_fine).ln() / refinement.ln()
}
