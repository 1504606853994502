use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wentzell_core::fem::{assemble, assemble_neumann};
use wentzell_core::mesh::{generate_lshape, generate_rectangle};
use wentzell_core::verification::{
    check_projection_inequality, invariance_harness, key_value_text, neumann_checks, sup_resolvent_bound, trace_constant_estimate,
    FnProjection, RealCone, UnitBall,
};
use wentzell_core::{BoundaryCoefficient, Error, MassLumping, OperatorBundle, WentzellOperator, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn square(n: usize, beta: C64, lumping: MassLumping) -> OperatorBundle {
    let m = generate_rectangle(1.0, 1.0, n, n).unwrap();
    assemble(&m, &BoundaryCoefficient::constant(&m, beta), lumping).unwrap()
}

#[test]
fn unit_ball_invariance_of_shifted_resolvent() {
    let op = WentzellOperator::new(square(64, c(1.0, 2.0), MassLumping::Lumped)).shifted();
    let report = invariance_harness(&op, &UnitBall, &[1.0, 10.0, 100.0], 50, 7).unwrap();
    assert_eq!(report.violations.len(), 3);
    assert!(report.max_violation <= 5e-3, "{report:?}");
}

#[test]
fn real_cone_invariance_for_neumann() {
    let m = generate_lshape(6).unwrap();
    let op = WentzellOperator::new(assemble_neumann(&m, MassLumping::Lumped).unwrap());
    let report = invariance_harness(&op, &RealCone, &[0.5, 1.0, 10.0], 20, 3).unwrap();
    assert!(report.max_violation <= 1e-12, "{}", report.max_violation);
}

#[test]
fn non_idempotent_projection_is_rejected() {
    let op = WentzellOperator::new(square(4, c(1.0, 0.0), MassLumping::Lumped));
    let halve = FnProjection::new("halve", |u: &[C64]| u.iter().map(|v| v * 0.5).collect());
    assert!(matches!(invariance_harness(&op, &halve, &[1.0], 2, 0), Err(Error::InvalidArgument(_))));
}

#[test]
fn sup_ratio_trends_to_one() {
    let op = WentzellOperator::new(square(16, c(1.0, 1.0), MassLumping::Lumped)).shifted();
    let report = sup_resolvent_bound(&op, &[1.0, 10.0, 100.0, 1000.0], 20, 11).unwrap();
    let r: Vec<f64> = report.ratios.iter().map(|x| x.1).collect();
    for w in r.windows(2) {
        assert!((w[1] - 1.0).max(0.0) <= (w[0] - 1.0).max(0.0) + 1e-3, "{r:?}");
        assert!((1.0 - w[1]).abs() <= (1.0 - w[0]).abs() + 1e-3, "{r:?}");
    }
    assert!(report.defect() <= 1e-10);
}

#[test]
fn projection_inequality_on_random_vectors() {
    let b = square(8, c(-0.5, 1.5), MassLumping::Consistent);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let scale = rng.gen_range(0.1..4.0);
        let u: Vec<C64> = (0..b.n_total()).map(|_| c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))).collect();
        let r = check_projection_inequality(&b, &u).unwrap();
        assert!(r.holds(1e-12), "{r:?}");
    }
}

#[test]
fn neumann_checks_pass_on_right_triangles() {
    let report = neumann_checks(&generate_rectangle(1.0, 1.0, 12, 12).unwrap(), 1).unwrap();
    assert!(report.passed(), "{report:?}");
    let text = key_value_text(&report);
    assert!(text.lines().any(|l| l.starts_with("context.mesh")));
    assert!(text.contains("equilibrium_ok: true"));
}

/// Dense real Cholesky factor of an SPD matrix.
fn cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            l[i][j] = if i == j { s.sqrt() } else { s / l[j][j] };
        }
    }
    l
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
fn jacobi_max_eigenvalue(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let (cs, sn) = (1.0 / (t * t + 1.0).sqrt(), t / (t * t + 1.0).sqrt());
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::NEG_INFINITY, f64::max)
}

/// `max u*Wu / u*(K+M)u` with `W` the diagonal of lumped boundary weights.
fn dense_trace_oracle(b: &OperatorBundle) -> f64 {
    let h: Vec<Vec<f64>> = b.h1_gram().to_dense().iter().map(|r| r.iter().map(|v| v.re).collect()).collect();
    let w: Vec<f64> = b.boundary_mass().row_sums().iter().map(|v| v.re).collect();
    let l = cholesky(&h);
    let n = h.len();
    // L⁻¹ W L⁻ᵀ, column by column
    let solve_lower = |rhs: &[f64]| {
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = (rhs[i] - (0..i).map(|k| l[i][k] * x[k]).sum::<f64>()) / l[i][i];
        }
        x
    };
    let mut linv = vec![vec![0.0; n]; n];
    for j in 0..n {
        let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
        let col = solve_lower(&e);
        for i in 0..n {
            linv[i][j] = col[i];
        }
    }
    let c: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| linv[i][k] * w[k] * linv[j][k]).sum()).collect()).collect();
    jacobi_max_eigenvalue(c)
}

#[test]
fn quadratic_trace_constant_matches_dense_eigenvalue() {
    let b = square(4, c(0.0, 0.0), MassLumping::Lumped);
    let est = trace_constant_estimate(&b, 2.0, 9).unwrap();
    let lambda_max = dense_trace_oracle(&b);
    assert!(est.c1 * est.c1 >= 0.99 * lambda_max, "{} vs {lambda_max}", est.c1 * est.c1);
    assert!(est.c1 * est.c1 <= lambda_max * (1.0 + 1e-9));
}

#[test]
fn trace_constant_stabilizes_under_refinement() {
    let est: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| trace_constant_estimate(&square(n, c(0.0, 0.0), MassLumping::Lumped), 4.0, 1).unwrap().c1)
        .collect();
    assert!(((est[2] - est[1]) / est[2]).abs() <= 0.05, "{est:?}");
}

#[test]
fn trace_exponent_below_two_is_rejected() {
    assert!(trace_constant_estimate(&square(2, c(0.0, 0.0), MassLumping::Lumped), 1.5, 0).is_err());
}
