//! Mesh, β and operator bundle from a resolved config.

use std::collections::BTreeMap;
use std::path::Path;

use wentzell_core::fem::assemble;
use wentzell_core::mesh::{generate_lshape, generate_rectangle, read_mesh};
use wentzell_core::{BoundaryCoefficient, BoundaryLoad, MassLumping, OperatorBundle, TriMesh, C64};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::expr::{parse_complex, ComplexExpr};

pub const BETA_VARS: &[&str] = &["x", "y", "label"];
pub const INTERIOR_VARS: &[&str] = &["x", "y", "lambda"];
pub const BOUNDARY_VARS: &[&str] = &["x", "y", "nx", "ny", "label", "lambda", "beta_re", "beta_im"];
pub const POINT_VARS: &[&str] = &["x", "y"];

/// `rectangle`, `lshape`, or a path to a `wmesh` file.
pub fn domain_is_file(cfg: &Config) -> bool {
    !matches!(cfg.str("domain"), "rectangle" | "lshape")
}

pub fn resolution(cfg: &Config) -> CliResult<usize> {
    let n = cfg.usize("resolution")?;
    if n == 0 {
        return Err(CliError::usage("resolution must be >= 1"));
    }
    Ok(n)
}

/// Rectangles use `n × n` cells, the L-shape `n` cells per unit length.
pub fn mesh_at(cfg: &Config, n: usize) -> CliResult<TriMesh> {
    let mesh = match cfg.str("domain") {
        "rectangle" => generate_rectangle(cfg.f64("width")?, cfg.f64("height")?, n, n)?,
        "lshape" => generate_lshape(n)?,
        path => read_mesh(Path::new(path))
            .map_err(|e| CliError::usage(format!("cannot load mesh file '{path}': {e}")))?,
    };
    Ok(mesh)
}

pub fn mesh(cfg: &Config) -> CliResult<TriMesh> {
    mesh_at(cfg, resolution(cfg)?)
}

pub fn lumping(cfg: &Config) -> CliResult<MassLumping> {
    match cfg.str("lumping") {
        "lumped" => Ok(MassLumping::Lumped),
        "consistent" => Ok(MassLumping::Consistent),
        other => Err(CliError::usage(format!("lumping must be 'lumped' or 'consistent', got '{other}'"))),
    }
}

/// `beta` is a complex literal, or with `beta_im` a pair of expressions
/// sampled at edge midpoints; `beta.arc<N>` literals override whole arcs.
pub fn beta(cfg: &Config, mesh: &TriMesh) -> CliResult<BoundaryCoefficient> {
    let edges = mesh.boundary_edges();
    let literal = if cfg.is_set("beta_im") { None } else { parse_complex("beta", cfg.str("beta")).ok() };
    let mut values: Vec<C64> = match literal {
        Some(c) => vec![c; edges.len()],
        None => {
            let e = ComplexExpr::parse("beta", cfg.str("beta"), "beta_im", cfg.str("beta_im"), BETA_VARS)?;
            edges
                .iter()
                .map(|edge| {
                    let p = mesh.edge_midpoint(edge);
                    e.eval(&[p[0], p[1], f64::from(edge.label)])
                })
                .collect()
        }
    };
    let arcs: BTreeMap<u32, C64> = cfg
        .arc_overrides()
        .into_iter()
        .map(|(label, text)| Ok((label, parse_complex(&format!("beta.arc{label}"), text)?)))
        .collect::<CliResult<_>>()?;
    let labels = mesh.arc_labels();
    if let Some(bad) = arcs.keys().find(|l| !labels.contains(l)) {
        return Err(CliError::usage(format!("beta.arc{bad}: the mesh has no arc {bad} (arcs: {labels:?})")));
    }
    for (v, e) in values.iter_mut().zip(edges) {
        if let Some(c) = arcs.get(&e.label) {
            *v = *c;
        }
    }
    let mut description = match literal {
        Some(c) => format!("constant {c}"),
        None => format!("expression ({}) + i ({})", cfg.str("beta"), if cfg.is_set("beta_im") { cfg.str("beta_im") } else { "0" }),
    };
    if !arcs.is_empty() {
        description.push_str(&format!(" with arc overrides {arcs:?}"));
    }
    Ok(BoundaryCoefficient::new(values, description)?)
}

pub fn bundle(cfg: &Config, mesh: &TriMesh) -> CliResult<OperatorBundle> {
    let b = beta(cfg, mesh)?;
    Ok(assemble(mesh, &b, lumping(cfg)?)?)
}

/// Nodal values of the interior expression pair `key`, `key_im`.
pub fn interior_field(cfg: &Config, key: &str, mesh: &TriMesh, lambda: f64) -> CliResult<Vec<C64>> {
    let key_im = format!("{key}_im");
    let e = ComplexExpr::parse(key, cfg.str(key), &key_im, cfg.str(&key_im), INTERIOR_VARS)?;
    Ok(mesh.vertices().iter().map(|p| e.eval(&[p[0], p[1], lambda])).collect())
}

/// Per-edge samples of the boundary expression pair `g`, `g_im`.
pub fn boundary_load(cfg: &Config, bundle: &OperatorBundle, lambda: f64) -> CliResult<BoundaryLoad> {
    let e = ComplexExpr::parse("g", cfg.str("g"), "g_im", cfg.str("g_im"), BOUNDARY_VARS)?;
    let mesh = bundle.mesh();
    let v = mesh.vertices();
    let beta = bundle.beta().values();
    Ok(BoundaryLoad::PerEdge(
        mesh.boundary_edges()
            .iter()
            .zip(beta)
            .map(|(edge, b)| {
                let n = mesh.outward_normal(edge);
                edge.nodes.map(|i| e.eval(&[v[i][0], v[i][1], n[0], n[1], f64::from(edge.label), lambda, b.re, b.im]))
            })
            .collect(),
    ))
}

pub fn write_output(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("cannot create output directory {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

/// `header` lines prefixed with `# `.
pub fn comment_block(header: &[String]) -> String {
    header.iter().map(|l| format!("# {l}\n")).collect()
}
