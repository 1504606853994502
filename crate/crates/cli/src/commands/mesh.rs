use serde::Serialize;
use wentzell_core::mesh::{quality_report, write_mesh_string};
use wentzell_core::verification::key_value_text;
use wentzell_core::MeshQualityReport;

use super::Outcome;
use crate::config::Config;
use crate::error::CliResult;
use crate::setup::{comment_block, mesh, write_output};

#[derive(Debug, Serialize)]
struct MeshSummary {
    name: String,
    vertices: usize,
    triangles: usize,
    edges: usize,
    boundary_edges: usize,
    arcs: Vec<u32>,
    boundary_loops: usize,
    euler_characteristic: i64,
    area: f64,
    perimeter: f64,
    quality: MeshQualityReport,
}

/// Writes `mesh.wmesh` and `mesh_report.txt`.
pub fn run(cfg: &Config) -> CliResult<Outcome> {
    let m = mesh(cfg)?;
    let header = cfg.header("mesh");
    let summary = MeshSummary {
        name: m.name().to_string(),
        vertices: m.num_vertices(),
        triangles: m.num_triangles(),
        edges: m.num_edges(),
        boundary_edges: m.boundary_edges().len(),
        arcs: m.arc_labels(),
        boundary_loops: m.boundary_loops(),
        euler_characteristic: m.euler_characteristic(),
        area: m.area(),
        perimeter: m.perimeter(),
        quality: quality_report(&m),
    };
    let report = key_value_text(&summary);
    let out = cfg.out_dir();
    write_output(&out, "mesh.wmesh", write_mesh_string(&m, &header))?;
    write_output(&out, "mesh_report.txt", comment_block(&header) + &report)?;
    Ok(Outcome::success(vec![
        format!("mesh {}: {} vertices, {} triangles, area {}", summary.name, summary.vertices, summary.triangles, summary.area),
        format!("wrote {}", out.join("mesh.wmesh").display()),
    ]))
}
