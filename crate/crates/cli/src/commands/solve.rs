use std::fmt::Write as _;
use std::sync::Arc;

use wentzell_core::fem::norms::{h1_seminorm_error, l2_error, observed_order};
use wentzell_core::mesh::quality_report;
use wentzell_core::operator::{state_csv, RobinSolver};
use wentzell_core::{ProductState, TriMesh, WentzellOperator};

use super::Outcome;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::expr::ComplexExpr;
use crate::heatmap::{max_magnitude, write_heatmap};
use crate::setup::{boundary_load, bundle, comment_block, domain_is_file, interior_field, mesh_at, resolution, write_output, POINT_VARS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub l2_error: f64,
    pub h1_error: f64,
    pub l2_order: Option<f64>,
    pub h1_order: Option<f64>,
}

struct Exact {
    u: ComplexExpr,
    dx: ComplexExpr,
    dy: ComplexExpr,
}

fn exact(cfg: &Config) -> CliResult<Option<Exact>> {
    if !cfg.is_set("exact") {
        return Ok(None);
    }
    let u = ComplexExpr::parse("exact", cfg.str("exact"), "exact_im", cfg.str("exact_im"), POINT_VARS)?;
    Ok(Some(Exact { dx: u.partial("x")?, dy: u.partial("y")?, u }))
}

fn solve_on(cfg: &Config, mesh: &TriMesh, lambda: f64) -> CliResult<(WentzellOperator, ProductState)> {
    let b = Arc::new(bundle(cfg, mesh)?);
    let f = interior_field(cfg, "f", mesh, lambda)?;
    let g = boundary_load(cfg, &b, lambda)?;
    let u = RobinSolver::new(Arc::clone(&b), lambda)?.solve(&f, &g)?;
    Ok((WentzellOperator::new(b), u))
}

pub fn convergence_csv(rows: &[ConvergenceRow], header: &[String]) -> String {
    let mut out = comment_block(header);
    out.push_str("n,h,l2_error,h1_error,l2_order,h1_order\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{},{}",
            r.n,
            r.h,
            r.l2_error,
            r.h1_error,
            opt(r.l2_order),
            opt(r.h1_order)
        );
    }
    out
}

/// Solves `λu − Δu = f`, `∂_ν u + (λ + β) u = g` at `resolution · 2^k` for
/// `k = 0..=refinements`. Writes `solution.csv` and `solution.ppm` for the
/// finest level and `convergence.csv` when `exact` is set.
pub fn run(cfg: &Config) -> CliResult<Outcome> {
    let lambda = cfg.f64("lambda")?;
    let refinements = cfg.usize("refinements")?;
    let n0 = resolution(cfg)?;
    let exact = exact(cfg)?;
    if refinements > 0 && domain_is_file(cfg) {
        return Err(CliError::usage("refinements need a generated domain (rectangle or lshape)"));
    }
    if refinements > 0 && exact.is_none() {
        return Err(CliError::usage("refinements need an exact solution (config key 'exact')"));
    }
    let header = cfg.header("solve");
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut last = None;
    for k in 0..=refinements {
        let n = n0 << k;
        let mesh = mesh_at(cfg, n)?;
        let (op, u) = solve_on(cfg, &mesh, lambda)?;
        if let Some(ex) = &exact {
            let l2 = l2_error(&mesh, u.coeffs(), |p| ex.u.eval(&p));
            let h1 = h1_seminorm_error(&mesh, u.coeffs(), |p| [ex.dx.eval(&p), ex.dy.eval(&p)]);
            let h = quality_report(&mesh).h_max;
            let (l2_order, h1_order) = match rows.last() {
                Some(prev) => (Some(observed_order(prev.l2_error, l2, prev.h / h)), Some(observed_order(prev.h1_error, h1, prev.h / h))),
                None => (None, None),
            };
            rows.push(ConvergenceRow { n, h, l2_error: l2, h1_error: h1, l2_order, h1_order });
        }
        last = Some((mesh, op, u));
    }
    let (mesh, op, u) = last.expect("at least one level");

    let out = cfg.out_dir();
    write_output(&out, "solution.csv", state_csv(&op, &u, &header))?;
    write_heatmap(&out.join("solution.ppm"), &header, &mesh, u.coeffs(), max_magnitude(u.coeffs()))?;
    let mut lines = vec![format!("solved on {} vertices, sup |u| = {:.6e}", mesh.num_vertices(), u.sup_norm())];
    if !rows.is_empty() {
        write_output(&out, "convergence.csv", convergence_csv(&rows, &header))?;
        lines.push("n h l2_error h1_error l2_order h1_order".into());
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
        for r in &rows {
            lines.push(format!(
                "{} {:.4e} {:.4e} {:.4e} {} {}",
                r.n,
                r.h,
                r.l2_error,
                r.h1_error,
                opt(r.l2_order),
                opt(r.h1_order)
            ));
        }
    }
    lines.push(format!("wrote {}", out.display()));
    Ok(Outcome::success(lines))
}
