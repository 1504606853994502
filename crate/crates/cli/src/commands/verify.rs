use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wentzell_core::mesh::quality_report;
use wentzell_core::operator::{choose_omega0, robin_solve, sector_estimate};
use wentzell_core::verification::{
    check_projection_inequality, key_value_text, linfty_certify, neumann_checks, stampacchia_threshold, sup_resolvent_bound,
    trace_constant_estimate, StampacchiaInput,
};
use wentzell_core::{BoundaryLoad, Error, MassLumping, OperatorBundle, TriMesh, WentzellOperator, C64};

use super::Outcome;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::setup::{bundle, comment_block, mesh, write_output};

pub const SUITES: &[&str] = &["neumann", "contractivity", "sector", "projection", "linfty", "stampacchia", "trace"];

const CONTRACTIVITY_TOL: f64 = 1e-9;
const CONTRACTIVITY_LAMBDAS: [f64; 3] = [1.0, 10.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl Status {
    fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::NotApplicable => "not-applicable",
        }
    }
}

pub struct SuiteResult {
    pub name: &'static str,
    pub status: Status,
    pub summary: String,
    /// `key: value` lines of the underlying report.
    pub details: String,
}

/// Comma-separated suite names, or `all`.
pub fn select(list: &str) -> CliResult<Vec<&'static str>> {
    if list.trim() == "all" {
        return Ok(SUITES.to_vec());
    }
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            SUITES.iter().copied().find(|k| *k == s).ok_or_else(|| {
                CliError::usage(format!("unknown verification suite '{s}' (available: all, {})", SUITES.join(", ")))
            })
        })
        .collect::<CliResult<Vec<_>>>()
        .and_then(|v| if v.is_empty() { Err(CliError::usage("no verification suite selected")) } else { Ok(v) })
}

struct Ctx<'a> {
    cfg: &'a Config,
    mesh: &'a TriMesh,
    bundle: Arc<OperatorBundle>,
    seed: u64,
    samples: usize,
}

fn neumann(ctx: &Ctx) -> CliResult<SuiteResult> {
    let r = neumann_checks(ctx.mesh, ctx.seed)?;
    Ok(SuiteResult {
        name: "neumann",
        status: Status::of(r.passed()),
        summary: format!(
            "equilibrium defect {:.2e}, min resolvent value {:.2e}, sup ratio {:.12}",
            r.equilibrium_defect, r.min_resolvent_value, r.sup_ratio
        ),
        details: key_value_text(&r),
    })
}

fn contractivity(ctx: &Ctx) -> CliResult<SuiteResult> {
    let op = WentzellOperator::new(Arc::clone(&ctx.bundle)).shifted();
    let r = sup_resolvent_bound(&op, &CONTRACTIVITY_LAMBDAS, ctx.samples, ctx.seed)?;
    let quality = quality_report(ctx.mesh);
    let lumped = ctx.bundle.lumping() == MassLumping::Lumped;
    let status = if !quality.is_nonobtuse || !lumped {
        Status::NotApplicable
    } else {
        Status::of(r.defect() <= CONTRACTIVITY_TOL)
    };
    let mut summary = format!("max sup ratio {:.12}, defect {:.3e}", r.max_ratio, r.defect());
    if status == Status::NotApplicable {
        let why = if lumped { "mesh has obtuse angles" } else { "mass matrix is not lumped" };
        summary.push_str(&format!(" ({why}; the discrete maximum principle is not guaranteed)"));
    }
    Ok(SuiteResult { name: "contractivity", status, summary, details: key_value_text(&r) })
}

fn sector(ctx: &Ctx) -> CliResult<SuiteResult> {
    let omega = ctx.cfg.opt_f64("omega0")?.unwrap_or_else(|| choose_omega0(ctx.bundle.beta()));
    let op = WentzellOperator::new(Arc::clone(&ctx.bundle));
    match sector_estimate(&op, omega, ctx.samples.max(1), ctx.seed) {
        Ok(s) => Ok(SuiteResult {
            name: "sector",
            status: Status::of(s.theta < std::f64::consts::FRAC_PI_2),
            summary: format!("omega {omega}, max |arg| {:.6} rad", s.theta),
            details: key_value_text(&s),
        }),
        Err(Error::SectorViolation { re, tol, .. }) => Ok(SuiteResult {
            name: "sector",
            status: Status::Fail,
            summary: format!("omega {omega}: form value with Re {re:.3e} below -{tol:.3e}"),
            details: format!("omega: {omega}\nviolation_re: {re}\ntolerance: {tol}\n"),
        }),
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct ProjectionSummary {
    samples: usize,
    min_stiffness_value: f64,
    min_shifted_value: f64,
    violations: usize,
}

fn projection(ctx: &Ctx) -> CliResult<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let n = ctx.bundle.n_total();
    let mut s = ProjectionSummary { samples: ctx.samples, min_stiffness_value: f64::INFINITY, min_shifted_value: f64::INFINITY, violations: 0 };
    for _ in 0..ctx.samples {
        let scale = rng.gen_range(0.1..4.0);
        let u: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))).collect();
        let r = check_projection_inequality(&ctx.bundle, &u)?;
        s.min_stiffness_value = s.min_stiffness_value.min(r.stiffness_value / r.scale);
        s.min_shifted_value = s.min_shifted_value.min(r.shifted_value / r.scale);
        if !r.holds(1e-12) {
            s.violations += 1;
        }
    }
    Ok(SuiteResult {
        name: "projection",
        status: Status::of(s.violations == 0),
        summary: format!("{} violations in {} samples", s.violations, s.samples),
        details: key_value_text(&s),
    })
}

fn linfty(ctx: &Ctx) -> CliResult<SuiteResult> {
    let lambda = ctx.cfg.f64("lambda")?.max(choose_omega0(ctx.bundle.beta()));
    let (p, q) = (ctx.cfg.f64("p")?, ctx.cfg.f64("q")?);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let n = ctx.bundle.n_total();
    let nb = ctx.bundle.boundary_nodes().len();
    let mut details = String::new();
    let (mut certified, mut energy, mut worst) = (0usize, 0usize, 0.0f64);
    for k in 0..ctx.samples {
        let f: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let g = BoundaryLoad::Nodal((0..nb).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect());
        let u = robin_solve(&ctx.bundle, lambda, &f, &g)?;
        let cert = linfty_certify(&ctx.bundle, lambda, u.coeffs(), &f, &g, p, q)?;
        certified += usize::from(cert.certified);
        energy += usize::from(cert.energy_holds);
        worst = worst.max(cert.overshoot());
        let _ = writeln!(
            details,
            "instance[{k}]: sup_norm {:.6e} t0 {:.6e} certified {} rigorous {} energy_holds {}",
            cert.sup_norm, cert.t0, cert.certified, cert.rigorous, cert.energy_holds
        );
    }
    Ok(SuiteResult {
        name: "linfty",
        status: Status::of(certified == ctx.samples),
        summary: format!(
            "{certified}/{} certified, energy inequality held in {energy}/{}, largest overshoot {worst:.3}",
            ctx.samples, ctx.samples
        ),
        details,
    })
}

fn stampacchia(ctx: &Ctx) -> CliResult<SuiteResult> {
    let hand = [((1.0, 1.0, 2.0, 1.0), 4.0), ((16.0, 2.0, 2.0, 1.0), 16.0)];
    let mut details = String::new();
    let mut ok = true;
    for ((c, a, d, p), want) in hand {
        let t0 = stampacchia_threshold(StampacchiaInput { c_phi: c, alpha: a, delta: d, phi0: p })?;
        ok &= t0 == want;
        let _ = writeln!(details, "threshold(c={c}, alpha={a}, delta={d}, phi0={p}): {t0} (expected {want})");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let target = 1e-12f64.log2();
    let mut worst_step = 0;
    for _ in 0..100 {
        let s = StampacchiaInput::new(
            rng.gen_range(0.1..=10.0),
            rng.gen_range(1.0..=4.0),
            rng.gen_range(1.0..=2.0f64).max(1.0 + 1e-3),
            rng.gen_range(1e-3..=10.0),
        )?;
        let phi = s.simulate_recursion_log2(60)?;
        match phi.iter().position(|v| *v < target) {
            Some(m) => worst_step = worst_step.max(m),
            None => {
                ok = false;
                let _ = writeln!(details, "not below 1e-12 within 60 steps: {s:?}");
            }
        }
    }
    let _ = writeln!(details, "random_inputs: 100\nslowest_step_below_1e-12: {worst_step}");
    Ok(SuiteResult {
        name: "stampacchia",
        status: Status::of(ok),
        summary: format!("hand values checked, 100 random recursions below 1e-12 by step {worst_step}"),
        details,
    })
}

fn trace(ctx: &Ctx) -> CliResult<SuiteResult> {
    let s = ctx.cfg.f64("trace_s")?;
    let r = trace_constant_estimate(&ctx.bundle, s, ctx.seed)?;
    Ok(SuiteResult {
        name: "trace",
        status: Status::Pass,
        summary: format!("c1(s = {s}) >= {:.6}", r.c1),
        details: key_value_text(&r),
    })
}

/// Runs the selected suites and writes `verify_report.txt`. Exit code 1
/// when any suite fails; not-applicable suites do not count as failures.
pub fn run(cfg: &Config) -> CliResult<Outcome> {
    let suites = select(cfg.str("suite"))?;
    let m = mesh(cfg)?;
    let ctx = Ctx {
        cfg,
        mesh: &m,
        bundle: Arc::new(bundle(cfg, &m)?),
        seed: cfg.parse("seed")?,
        samples: cfg.usize("samples")?,
    };
    if ctx.samples == 0 {
        return Err(CliError::usage("samples must be >= 1"));
    }
    let mut results = Vec::new();
    for name in suites {
        let r = match name {
            "neumann" => neumann(&ctx),
            "contractivity" => contractivity(&ctx),
            "sector" => sector(&ctx),
            "projection" => projection(&ctx),
            "linfty" => linfty(&ctx),
            "stampacchia" => stampacchia(&ctx),
            _ => trace(&ctx),
        }?;
        results.push(r);
    }

    let header = cfg.header("verify");
    let mut report = comment_block(&header);
    let mut lines = Vec::new();
    for r in &results {
        let _ = writeln!(report, "{}.status: {}", r.name, r.status.label());
        let _ = writeln!(report, "{}.summary: {}", r.name, r.summary);
        for l in r.details.lines() {
            let _ = writeln!(report, "{}.{l}", r.name);
        }
        lines.push(format!("{} {}: {}", r.status.label(), r.name, r.summary));
    }
    let failed = results.iter().filter(|r| r.status == Status::Fail).count();
    let _ = writeln!(report, "failed: {failed}");
    write_output(&cfg.out_dir(), "verify_report.txt", report)?;
    lines.push(format!("{} suites, {failed} failed", results.len()));
    Ok(Outcome { code: if failed > 0 { 1 } else { 0 }, lines })
}
