use serde::Serialize;

use super::TriMesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshQualityReport {
    /// Largest interior angle over all triangles, radians.
    pub max_angle: f64,
    pub is_nonobtuse: bool,
    pub h_max: f64,
    pub h_min: f64,
}

pub const NONOBTUSE_TOL: f64 = 1e-12;

fn angle(at: [f64; 2], p: [f64; 2], q: [f64; 2]) -> f64 {
    let (u, v) = ([p[0] - at[0], p[1] - at[1]], [q[0] - at[0], q[1] - at[1]]);
    let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
    cos.clamp(-1.0, 1.0).acos()
}

pub fn quality_report(mesh: &TriMesh) -> MeshQualityReport {
    let v = mesh.vertices();
    let mut max_angle: f64 = 0.0;
    let mut h_max: f64 = 0.0;
    let mut h_min = f64::INFINITY;
    for t in mesh.triangles() {
        for k in 0..3 {
            let (a, b, c) = (v[t[k]], v[t[(k + 1) % 3]], v[t[(k + 2) % 3]]);
            max_angle = max_angle.max(angle(a, b, c));
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            h_max = h_max.max(len);
            h_min = h_min.min(len);
        }
    }
    MeshQualityReport {
        max_angle,
        is_nonobtuse: max_angle <= std::f64::consts::FRAC_PI_2 + NONOBTUSE_TOL,
        h_max,
        h_min,
    }
}
