use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::WentzellOperator;
use crate::error::{Error, Result};
use crate::fem::ProductState;
use crate::sparse::{lu_factor, CsrMatrix, LuFactorization};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ImplicitEuler,
    CrankNicolson,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ImplicitEuler => "implicit-euler",
            Scheme::CrankNicolson => "crank-nicolson",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "implicit-euler" => Ok(Scheme::ImplicitEuler),
            "crank-nicolson" => Ok(Scheme::CrankNicolson),
            other => Err(Error::invalid(format!(
                "unknown scheme '{other}' (expected implicit-euler or crank-nicolson)"
            ))),
        }
    }
}

/// One time step of fixed size, factored once.
///
/// Implicit Euler: `(G + dt S) u⁺ = G u`.
/// Crank–Nicolson: `(G + dt/2 S) u⁺ = (G − dt/2 S) u`.
#[derive(Debug, Clone)]
pub struct Stepper {
    scheme: Scheme,
    dt: f64,
    lhs: CsrMatrix,
    rhs: CsrMatrix,
    lu: Option<LuFactorization>,
}

impl Stepper {
    pub fn new(op: &WentzellOperator, scheme: Scheme, dt: f64) -> Result<Self> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("time step must be finite and >= 0, got {dt}")));
        }
        let g = op.bundle().gram();
        let s = op.form_matrix();
        let one = C64::new(1.0, 0.0);
        let theta = match scheme {
            Scheme::ImplicitEuler => dt,
            Scheme::CrankNicolson => dt / 2.0,
        };
        let lhs = g.linear_combination(one, s, C64::new(theta, 0.0))?;
        let rhs = match scheme {
            Scheme::ImplicitEuler => g.clone(),
            Scheme::CrankNicolson => g.linear_combination(one, s, C64::new(-theta, 0.0))?,
        };
        let lu = if dt == 0.0 {
            None
        } else {
            Some(lu_factor(&lhs).map_err(|e| Error::Solver {
                lambda: 1.0 / theta,
                reason: format!("{} step with dt = {dt}: {e}", scheme.name()),
            })?)
        };
        Ok(Stepper { scheme, dt, lhs, rhs, lu })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, state: &ProductState) -> Result<ProductState> {
        let Some(lu) = &self.lu else {
            return Ok(state.clone());
        };
        let b = self.rhs.spmv(state.coeffs())?;
        let u = lu.solve(&b)?;
        let r = self.lhs.spmv(&u)?;
        let inf = |v: &[C64]| v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let resid = r.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let scale = self.lhs.norm_inf() * inf(&u) + inf(&b);
        if resid > super::SOLVE_RESIDUAL_TOL * scale {
            return Err(Error::Solver {
                lambda: 1.0 / self.dt,
                reason: format!("{} step residual {resid:.3e} (scale {scale:.3e})", self.scheme.name()),
            });
        }
        Ok(state.with_coeffs(u))
    }
}

pub fn step_implicit_euler(op: &WentzellOperator, state: &ProductState, dt: f64) -> Result<ProductState> {
    Stepper::new(op, Scheme::ImplicitEuler, dt)?.step(state)
}

pub fn step_crank_nicolson(op: &WentzellOperator, state: &ProductState, dt: f64) -> Result<ProductState> {
    Stepper::new(op, Scheme::CrankNicolson, dt)?.step(state)
}

/// `(I + (t/n) A)⁻ⁿ state`.
pub fn euler_exponential(op: &WentzellOperator, state: &ProductState, t: f64, n: usize) -> Result<ProductState> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("t must be >= 0, got {t}")));
    }
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let stepper = Stepper::new(op, Scheme::ImplicitEuler, t / n as f64)?;
    let mut u = state.clone();
    for _ in 0..n {
        u = stepper.step(&u)?;
    }
    Ok(u)
}

/// Which quantities [`evolve`] records per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observers {
    pub mass: bool,
    pub sup_norm: bool,
    pub h1_norm: bool,
    pub energy: bool,
}

impl Observers {
    pub fn all() -> Self {
        Observers { mass: true, sup_norm: true, h1_norm: true, energy: true }
    }

    pub fn none() -> Self {
        Observers { mass: false, sup_norm: false, h1_norm: false, energy: false }
    }
}

impl Default for Observers {
    fn default() -> Self {
        Self::all()
    }
}

/// Observer values at one time; unselected observers are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub t: f64,
    /// `𝟙ᵀ G u`
    pub mass: Option<C64>,
    pub sup_norm: Option<f64>,
    pub h1_norm: Option<f64>,
    /// `u* S u`
    pub energy: Option<C64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub scheme: Scheme,
    pub times: Vec<f64>,
    pub states: Vec<ProductState>,
    pub observations: Vec<Observation>,
    /// Set when a solver error stopped the evolution early.
    pub aborted: Option<String>,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.aborted.is_none()
    }

    pub fn last(&self) -> &ProductState {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// CSV with columns `t,mass_re,mass_im,sup_norm,h1_norm,energy_re,energy_im`;
    /// `header` lines are emitted first, each prefixed with `# `.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut out = String::new();
        for line in header {
            let _ = writeln!(out, "# {line}");
        }
        if let Some(reason) = &self.aborted {
            let _ = writeln!(out, "# aborted: {reason}");
        }
        out.push_str("t,mass_re,mass_im,sup_norm,h1_norm,energy_re,energy_im\n");
        let f = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
        for o in &self.observations {
            let _ = writeln!(
                out,
                "{:.16e},{},{},{},{},{},{}",
                o.t,
                f(o.mass.map(|m| m.re)),
                f(o.mass.map(|m| m.im)),
                f(o.sup_norm),
                f(o.h1_norm),
                f(o.energy.map(|e| e.re)),
                f(o.energy.map(|e| e.im)),
            );
        }
        out
    }
}

fn observe(op: &WentzellOperator, t: f64, u: &ProductState, which: Observers) -> Result<Observation> {
    let b = op.bundle();
    let c = u.coeffs();
    let mass = if which.mass { Some(b.gram().spmv(c)?.iter().sum()) } else { None };
    let energy = if which.energy { Some(op.form_matrix().form(c, c)?) } else { None };
    Ok(Observation {
        t,
        mass,
        sup_norm: which.sup_norm.then(|| u.sup_norm()),
        h1_norm: which.h1_norm.then(|| b.h1_norm(c)),
        energy,
    })
}

/// Steps from 0 to `t_final` with step `dt`; a final shorter step lands
/// exactly on `t_final`. Solver failures stop the loop and mark the
/// trajectory as aborted.
pub fn evolve(
    op: &WentzellOperator,
    initial: &ProductState,
    t_final: f64,
    dt: f64,
    scheme: Scheme,
    observers: Observers,
) -> Result<Trajectory> {
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::invalid(format!("t_final must be finite and >= 0, got {t_final}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("dt must be finite and > 0, got {dt}")));
    }
    if initial.len() != op.bundle().n_total() {
        return Err(Error::DimensionMismatch { expected: op.bundle().n_total(), got: initial.len() });
    }
    let full = ((t_final / dt) * (1.0 + 1e-12)).floor() as usize;
    let remainder = t_final - full as f64 * dt;
    let mut steps: Vec<f64> = vec![dt; full];
    if remainder > 1e-12 * t_final.max(dt) {
        steps.push(remainder);
    }

    let mut traj = Trajectory {
        scheme,
        times: vec![0.0],
        states: vec![initial.clone()],
        observations: vec![observe(op, 0.0, initial, observers)?],
        aborted: None,
    };
    let mut stepper = match Stepper::new(op, scheme, dt) {
        Ok(s) => s,
        Err(e) => {
            traj.aborted = Some(e.to_string());
            return Ok(traj);
        }
    };
    for (k, &h) in steps.iter().enumerate() {
        if h != stepper.dt() {
            stepper = match Stepper::new(op, scheme, h) {
                Ok(s) => s,
                Err(e) => {
                    traj.aborted = Some(e.to_string());
                    break;
                }
            };
        }
        let next = match stepper.step(traj.last()) {
            Ok(u) => u,
            Err(e) => {
                traj.aborted = Some(format!("step {}: {e}", k + 1));
                break;
            }
        };
        let t = if k + 1 == steps.len() { t_final } else { (k + 1) as f64 * dt };
        traj.observations.push(observe(op, t, &next, observers)?);
        traj.times.push(t);
        traj.states.push(next);
    }
    Ok(traj)
}

/// Node-value CSV `vertex,x,y,re,im`, one row per mesh vertex.
pub fn state_csv(op: &WentzellOperator, state: &ProductState, header: &[String]) -> String {
    let mut out = String::new();
    for line in header {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str("vertex,x,y,re,im\n");
    for (i, (p, v)) in op.bundle().mesh().vertices().iter().zip(state.coeffs()).enumerate() {
        let _ = writeln!(out, "{i},{:.16e},{:.16e},{:.16e},{:.16e}", p[0], p[1], v.re, v.im);
    }
    out
}
