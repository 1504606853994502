//! The line-oriented `wmesh` text format.
//!
//! ```text
//! wmesh 1
//! v x y          # one per vertex
//! t i j k        # one per triangle, 0-based, counterclockwise
//! b i j label    # optional, one per boundary edge
//! ```
//!
//! Everything after `#` on a line is a comment. Floats are written with
//! 17 significant digits so that write/read is lossless.

use std::fmt::Write as _;
use std::path::Path;

use super::{BoundaryEdge, TriMesh};
use crate::error::{Error, Result};

pub fn write_mesh_string(mesh: &TriMesh, header_comments: &[String]) -> String {
    let mut out = String::new();
    for c in header_comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str("wmesh 1\n");
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {:.16e} {:.16e}", v[0], v[1]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
    }
    for e in mesh.boundary_edges() {
        let _ = writeln!(out, "b {} {} {}", e.nodes[0], e.nodes[1], e.label);
    }
    out
}

pub fn write_mesh(mesh: &TriMesh, path: impl AsRef<Path>, header_comments: &[String]) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh, header_comments))?;
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "mesh".into());
    Ok(parse_mesh(&text)?.with_name(name))
}

pub fn parse_mesh(text: &str) -> Result<TriMesh> {
    let mut seen_header = false;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut boundary = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !seen_header {
            if fields != ["wmesh", "1"] {
                return Err(err(format!("expected header `wmesh 1`, found `{line}`")));
            }
            seen_header = true;
            continue;
        }
        let want = |n: usize| -> Result<()> {
            if fields.len() == n + 1 {
                Ok(())
            } else {
                Err(err(format!("`{}` record needs {n} fields, found {}", fields[0], fields.len() - 1)))
            }
        };
        let idx = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad index `{s}`")));
        match fields[0] {
            "v" => {
                want(2)?;
                let f = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad coordinate `{s}`")));
                vertices.push([f(fields[1])?, f(fields[2])?]);
            }
            "t" => {
                want(3)?;
                triangles.push([idx(fields[1])?, idx(fields[2])?, idx(fields[3])?]);
            }
            "b" => {
                want(3)?;
                let label = fields[3].parse::<u32>().map_err(|_| err(format!("bad label `{}`", fields[3])))?;
                boundary.push(BoundaryEdge { nodes: [idx(fields[1])?, idx(fields[2])?], label });
            }
            other => return Err(err(format!("unknown record `{other}`"))),
        }
    }
    if !seen_header {
        return Err(Error::Parse { line: text.lines().count().max(1), msg: "missing `wmesh 1` header".into() });
    }
    let nv = vertices.len();
    if let Some(e) = boundary.iter().find(|e| e.nodes.iter().any(|&i| i >= nv)) {
        return Err(Error::Validation(format!("boundary edge ({}, {}) references nonexistent vertex", e.nodes[0], e.nodes[1])));
    }
    TriMesh::new(vertices, triangles, if boundary.is_empty() { None } else { Some(boundary) })
}
