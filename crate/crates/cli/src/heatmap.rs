//! Binary PPM heatmaps of nodal magnitudes.
//!
//! The mesh bounding box is scaled uniformly into a 512×512 canvas and
//! centered. Each pixel center inside a triangle gets the barycentric
//! interpolant of the complex nodal values; its magnitude divided by the
//! frame scale is quantized to a level `0..=255`. Levels map to colors by
//! linear interpolation between the knots
//!
//! | level | color           |
//! |-------|-----------------|
//! | 0     | black (0,0,0)   |
//! | 64    | blue (0,0,255)  |
//! | 128   | cyan (0,255,255)|
//! | 192   | yellow (255,255,0) |
//! | 255   | white (255,255,255) |
//!
//! Pixels outside the domain are gray (128,128,128).

use std::fmt::Write as _;
use std::path::Path;

use wentzell_core::{TriMesh, C64};

pub const SIZE: usize = 512;
pub const BACKGROUND: [u8; 3] = [128, 128, 128];

const KNOTS: [(u8, [u8; 3]); 5] =
    [(0, [0, 0, 0]), (64, [0, 0, 255]), (128, [0, 255, 255]), (192, [255, 255, 0]), (255, [255, 255, 255])];

pub fn ramp(level: u8) -> [u8; 3] {
    let k = KNOTS.windows(2).find(|w| level <= w[1].0).expect("knots cover 0..=255");
    let ((l0, c0), (l1, c1)) = (k[0], k[1]);
    let s = f64::from(level - l0) / f64::from(l1 - l0);
    std::array::from_fn(|i| (f64::from(c0[i]) + s * (f64::from(c1[i]) - f64::from(c0[i]))).round() as u8)
}

pub fn level(magnitude: f64, scale: f64) -> u8 {
    if !(scale > 0.0) {
        return 0;
    }
    (255.0 * (magnitude / scale).clamp(0.0, 1.0)).round() as u8
}

/// RGB bytes, row-major with the top row (largest y) first.
pub fn rasterize(mesh: &TriMesh, values: &[C64], scale: f64) -> Vec<u8> {
    let mut rgb: Vec<u8> = BACKGROUND.iter().copied().cycle().take(3 * SIZE * SIZE).collect();
    let v = mesh.vertices();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in v {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    if !(extent > 0.0) {
        return rgb;
    }
    let px = SIZE as f64 / extent;
    let offset = [
        0.5 * (SIZE as f64 - (hi[0] - lo[0]) * px),
        0.5 * (SIZE as f64 - (hi[1] - lo[1]) * px),
    ];
    // canvas coordinates, y pointing down
    let to_canvas = |p: [f64; 2]| [offset[0] + (p[0] - lo[0]) * px, SIZE as f64 - offset[1] - (p[1] - lo[1]) * px];

    for t in mesh.triangles() {
        let [a, b, c] = t.map(|i| to_canvas(v[i]));
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        if det == 0.0 {
            continue;
        }
        let range = |d: usize| {
            let min = a[d].min(b[d]).min(c[d]);
            let max = a[d].max(b[d]).max(c[d]);
            let first = (min - 0.5).ceil().max(0.0) as usize;
            let last = ((max - 0.5).floor() as isize).min(SIZE as isize - 1);
            (first, last)
        };
        let ((x0, x1), (y0, y1)) = (range(0), range(1));
        if x1 < 0 || y1 < 0 {
            continue;
        }
        let tol = -1e-9;
        for j in y0..=y1 as usize {
            for i in x0..=x1 as usize {
                let q = [i as f64 + 0.5, j as f64 + 0.5];
                let l1 = ((q[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (q[1] - a[1])) / det;
                let l2 = ((b[0] - a[0]) * (q[1] - a[1]) - (q[0] - a[0]) * (b[1] - a[1])) / det;
                let l0 = 1.0 - l1 - l2;
                if l0 < tol || l1 < tol || l2 < tol {
                    continue;
                }
                let z = values[t[0]] * l0 + values[t[1]] * l1 + values[t[2]] * l2;
                let k = 3 * (j * SIZE + i);
                rgb[k..k + 3].copy_from_slice(&ramp(level(z.norm(), scale)));
            }
        }
    }
    rgb
}

/// `P6` file with the header lines as `#` comments.
pub fn ppm_bytes(header: &[String], rgb: &[u8]) -> Vec<u8> {
    let mut head = String::from("P6\n");
    for line in header {
        let _ = writeln!(head, "# {}", line.replace(['\n', '\r'], " "));
    }
    let _ = write!(head, "{SIZE} {SIZE}\n255\n");
    let mut out = head.into_bytes();
    out.extend_from_slice(rgb);
    out
}

pub fn write_heatmap(path: &Path, header: &[String], mesh: &TriMesh, values: &[C64], scale: f64) -> std::io::Result<()> {
    std::fs::write(path, ppm_bytes(header, &rasterize(mesh, values, scale)))
}

pub fn max_magnitude(values: &[C64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
