use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wentzell_core::operator::{evolve, state_csv, Observers};
use wentzell_core::{OperatorBundle, ProductState, Scheme, WentzellOperator, C64};

use super::Outcome;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::expr::ComplexExpr;
use crate::heatmap::{max_magnitude, write_heatmap};
use crate::setup::{bundle, mesh, write_output, POINT_VARS};

/// Reads a node-value CSV `vertex,x,y,re,im` (comment lines start with `#`).
pub fn read_node_values(path: &Path, n: usize) -> CliResult<Vec<C64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read initial_file {}: {e}", path.display())))?;
    let mut values = vec![None; n];
    let bad = |ln: usize, msg: &str| CliError::usage(format!("{}:{}: {msg}", path.display(), ln + 1));
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("vertex") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 5 {
            return Err(bad(ln, "expected 5 columns vertex,x,y,re,im"));
        }
        let i: usize = cols[0].parse().map_err(|_| bad(ln, "bad vertex index"))?;
        let re: f64 = cols[3].parse().map_err(|_| bad(ln, "bad re value"))?;
        let im: f64 = cols[4].parse().map_err(|_| bad(ln, "bad im value"))?;
        if i >= n {
            return Err(bad(ln, &format!("vertex {i} out of range (mesh has {n})")));
        }
        values[i] = Some(C64::new(re, im));
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| CliError::usage(format!("{}: no value for vertex {i}", path.display()))))
        .collect()
}

/// `initial_file`, else `initial = random` (entries uniform in the unit
/// square, seeded), else the expression pair `initial`, `initial_im`.
pub fn initial_state(cfg: &Config, bundle: &OperatorBundle) -> CliResult<ProductState> {
    let n = bundle.n_total();
    let coeffs = if cfg.is_set("initial_file") {
        read_node_values(Path::new(cfg.str("initial_file")), n)?
    } else if cfg.str("initial") == "random" {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.parse("seed")?);
        (0..n).map(|_| C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))).collect()
    } else {
        let e = ComplexExpr::parse("initial", cfg.str("initial"), "initial_im", cfg.str("initial_im"), POINT_VARS)?;
        bundle.mesh().vertices().iter().map(|p| e.eval(p)).collect()
    };
    Ok(ProductState::new(bundle, coeffs)?)
}

pub fn operator(cfg: &Config, bundle: OperatorBundle) -> CliResult<WentzellOperator> {
    let mut op = WentzellOperator::new(Arc::new(bundle));
    if let Some(w) = cfg.opt_f64("omega0")? {
        if !(w >= 0.0) {
            return Err(CliError::usage("omega0 must be >= 0"));
        }
        op = op.with_omega0(w);
    }
    if cfg.bool("shifted")? {
        op = op.shifted();
    }
    Ok(op)
}

/// Writes `trajectory.csv` and, every `snapshot_every` steps and at the
/// last step, `snapshot_NNNNN.csv` with `frame_NNNNN.ppm`. Frames share one
/// color scale, the largest nodal magnitude over the written snapshots.
pub fn run(cfg: &Config) -> CliResult<Outcome> {
    let scheme: Scheme = cfg.parse("scheme")?;
    let dt = cfg.f64("dt")?;
    let t_final = cfg.f64("t_final")?;
    if !(dt > 0.0) {
        return Err(CliError::usage(format!("dt must be > 0, got {dt}")));
    }
    let every = cfg.usize("snapshot_every")?.max(1);
    let m = mesh(cfg)?;
    let op = operator(cfg, bundle(cfg, &m)?)?;
    let u0 = initial_state(cfg, op.bundle())?;
    let traj = evolve(&op, &u0, t_final, dt, scheme, Observers::all())?;

    let header = cfg.header("evolve");
    let out = cfg.out_dir();
    write_output(&out, "trajectory.csv", traj.to_csv(&header))?;
    let last = traj.states.len() - 1;
    let picked: Vec<usize> = (0..=last).filter(|k| k % every == 0 || *k == last).collect();
    let scale = picked.iter().map(|&k| max_magnitude(traj.states[k].coeffs())).fold(0.0, f64::max);
    for &k in &picked {
        let mut h = header.clone();
        h.push(format!("step = {k}"));
        h.push(format!("t = {:.16e}", traj.times[k]));
        write_output(&out, &format!("snapshot_{k:05}.csv"), state_csv(&op, &traj.states[k], &h))?;
        write_heatmap(&out.join(format!("frame_{k:05}.ppm")), &h, &m, traj.states[k].coeffs(), scale)?;
    }
    let mut lines = vec![
        format!("{} steps of {} to t = {}", last, scheme.name(), traj.times[last]),
        format!("{} snapshots written to {}", picked.len(), out.display()),
    ];
    if let Some(reason) = &traj.aborted {
        lines.push(format!("aborted: {reason}"));
        return Err(CliError::Numerical(lines.join("\n")));
    }
    Ok(Outcome::success(lines))
}
