use super::CsrMatrix;
use crate::error::{Error, Result};
use crate::C64;

pub trait Preconditioner {
    /// `z = M⁻¹ r`.
    fn apply(&self, r: &[C64], z: &mut [C64]);
}

/// No preconditioning.
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[C64], z: &mut [C64]) {
        z.copy_from_slice(r);
    }
}

pub struct Jacobi {
    inv_diag: Vec<C64>,
}

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Self {
        let inv_diag = a
            .diagonal()
            .into_iter()
            .map(|d| if d == C64::new(0.0, 0.0) { C64::new(1.0, 0.0) } else { d.inv() })
            .collect();
        Jacobi { inv_diag }
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[C64], z: &mut [C64]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
    }
}

/// Failure report of [`bicgstab`]: best iterate and the relative residual
/// `‖b − Ax‖ / ‖b‖` after each iteration.
#[derive(Debug, Clone)]
pub struct NoConvergence {
    pub best: Vec<C64>,
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub breakdown: bool,
}

impl NoConvergence {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone)]
pub struct Converged {
    pub x: Vec<C64>,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Right-preconditioned BiCGSTAB from a zero initial guess.
pub fn bicgstab(
    a: &CsrMatrix,
    b: &[C64],
    tol: f64,
    maxit: usize,
    precond: &dyn Preconditioner,
) -> Result<Converged> {
    let n = b.len();
    if a.nrows() != a.ncols() || a.nrows() != n {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: n });
    }
    let zero = C64::new(0.0, 0.0);
    let bnorm = norm(b);
    let mut x = vec![zero; n];
    if bnorm == 0.0 {
        return Ok(Converged { x, iterations: 0, residual_history: Vec::new() });
    }
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    let mut y = vec![zero; n];
    let mut s = vec![zero; n];
    let mut z = vec![zero; n];
    let mut t = vec![zero; n];
    let mut history = Vec::new();
    let mut best = (x.clone(), 1.0);

    for it in 1..=maxit {
        let rho_new = dot(&r_hat, &r);
        if rho_new.norm() <= f64::MIN_POSITIVE || omega.norm() <= f64::MIN_POSITIVE {
            return Err(no_convergence(best.0, history, it - 1, true));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond.apply(&p, &mut y);
        a.spmv_into(&y, &mut v)?;
        let denom = dot(&r_hat, &v);
        if denom.norm() <= f64::MIN_POSITIVE {
            return Err(no_convergence(best.0, history, it - 1, true));
        }
        alpha = rho / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        let s_rel = norm(&s) / bnorm;
        if s_rel <= tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            history.push(s_rel);
            return Ok(Converged { x, iterations: it, residual_history: history });
        }
        precond.apply(&s, &mut z);
        a.spmv_into(&z, &mut t)?;
        let tt = dot(&t, &t);
        omega = if tt.norm() > 0.0 { dot(&t, &s) / tt } else { zero };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        let rel = norm(&r) / bnorm;
        history.push(rel);
        if rel < best.1 {
            best = (x.clone(), rel);
        }
        if rel <= tol {
            return Ok(Converged { x, iterations: it, residual_history: history });
        }
    }
    Err(no_convergence(best.0, history, maxit, false))
}

fn no_convergence(best: Vec<C64>, residual_history: Vec<f64>, iterations: usize, breakdown: bool) -> Error {
    Error::NoConvergence(Box::new(NoConvergence { best, residual_history, iterations, breakdown }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new(2.0, 0.0)));
            if i > 0 {
                t.push((i, i - 1, C64::new(-1.0, 0.0)));
                t.push((i - 1, i, C64::new(-1.0, 0.0)));
            }
        }
        CsrMatrix::from_triplets(n, n, t).unwrap()
    }

    #[test]
    fn zero_rhs_gives_zero_without_iterating() {
        let a = laplace_1d(5);
        let sol = bicgstab(&a, &[C64::new(0.0, 0.0); 5], 1e-10, 10, &IdentityPreconditioner).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.x.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn maxit_one_reports_history_of_length_one() {
        let a = laplace_1d(200);
        let b: Vec<C64> = (0..200).map(|i| C64::new((i as f64 * 0.37).sin(), 0.0)).collect();
        match bicgstab(&a, &b, 1e-12, 1, &IdentityPreconditioner) {
            Err(Error::NoConvergence(nc)) => {
                assert_eq!(nc.residual_history.len(), 1);
                assert_eq!(nc.best.len(), 200);
                assert!(!nc.breakdown);
            }
            other => panic!("expected no-convergence, got {other:?}"),
        }
    }

    #[test]
    fn jacobi_converges_on_small_system() {
        let a = laplace_1d(30);
        let b = vec![C64::new(1.0, -1.0); 30];
        let sol = bicgstab(&a, &b, 1e-12, 500, &Jacobi::new(&a)).unwrap();
        let r = a.spmv(&sol.x).unwrap();
        let err: f64 = r.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9);
    }
}
