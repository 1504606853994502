//! Left-looking sparse LU with threshold partial pivoting (Gilbert–Peierls),
//! applied after a symmetric reverse Cuthill–McKee reordering.
//!
//! With `Q` the RCM permutation and `P` the pivoting permutation the factors
//! satisfy `P (Qᵀ A Q) = L U`, `L` unit lower triangular.

use super::{ordering::reverse_cuthill_mckee, CsrMatrix};
use crate::error::{Error, Result};
use crate::C64;

const NONE: usize = usize::MAX;

/// Diagonal entry is kept as pivot when within this factor of the column max.
const DIAGONAL_PREFERENCE: f64 = 0.1;

/// Pivots below `PIVOT_TOLERANCE * max|A|` are reported as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Sparse column storage used for the factors.
#[derive(Debug, Clone, Default)]
struct Columns {
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<C64>,
}

impl Columns {
    fn col(&self, j: usize) -> std::ops::Range<usize> {
        self.ptr[j]..self.ptr[j + 1]
    }
}

#[derive(Debug, Clone)]
pub struct LuFactorization {
    n: usize,
    /// Column ordering (RCM): `col_perm[new] = old`.
    col_perm: Vec<usize>,
    /// Row pivoting on the reordered matrix: `row_pivot[old_row] = step`.
    row_pivot: Vec<usize>,
    /// Strictly lower part of `L`, row indices in pivot numbering.
    lower: Columns,
    /// Strictly upper part of `U`, row indices in pivot numbering.
    upper: Columns,
    diag: Vec<C64>,
    pivot_growth: f64,
}

impl LuFactorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `max|U| / max|A|`.
    pub fn pivot_growth(&self) -> f64 {
        self.pivot_growth
    }

    pub fn fill(&self) -> usize {
        self.lower.val.len() + self.upper.val.len() + self.n
    }

    pub fn column_permutation(&self) -> &[usize] {
        &self.col_perm
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: b.len() });
        }
        let mut z = vec![C64::new(0.0, 0.0); self.n];
        // row i of the reordered system is original row col_perm[i]
        for (i, &orig) in self.col_perm.iter().enumerate() {
            z[self.row_pivot[i]] = b[orig];
        }
        for j in 0..self.n {
            let zj = z[j];
            if zj == C64::new(0.0, 0.0) {
                continue;
            }
            for p in self.lower.col(j) {
                z[self.lower.idx[p]] -= self.lower.val[p] * zj;
            }
        }
        for j in (0..self.n).rev() {
            let yj = z[j] / self.diag[j];
            z[j] = yj;
            for p in self.upper.col(j) {
                z[self.upper.idx[p]] -= self.upper.val[p] * yj;
            }
        }
        let mut x = vec![C64::new(0.0, 0.0); self.n];
        for (j, &orig) in self.col_perm.iter().enumerate() {
            x[orig] = z[j];
        }
        Ok(x)
    }

    /// Largest entry of `P Qᵀ A Q − L U`, computed column by column.
    pub fn reconstruction_residual(&self, a: &CsrMatrix) -> f64 {
        let n = self.n;
        let permuted = a.permute_symmetric(&self.col_perm).transpose();
        let mut work = vec![C64::new(0.0, 0.0); n];
        let mut worst: f64 = 0.0;
        for k in 0..n {
            // (L U)[:, k] = sum_j L[:, j] U[j, k]
            let mut touched = Vec::new();
            let add_l_col = |j: usize, ujk: C64, work: &mut Vec<C64>, touched: &mut Vec<usize>| {
                work[j] += ujk;
                touched.push(j);
                for p in self.lower.col(j) {
                    work[self.lower.idx[p]] += self.lower.val[p] * ujk;
                    touched.push(self.lower.idx[p]);
                }
            };
            for p in self.upper.col(k) {
                add_l_col(self.upper.idx[p], self.upper.val[p], &mut work, &mut touched);
            }
            add_l_col(k, self.diag[k], &mut work, &mut touched);
            for (row, v) in permuted.row(k) {
                let r = self.row_pivot[row];
                work[r] -= v;
                touched.push(r);
            }
            for &r in &touched {
                worst = worst.max(work[r].norm());
                work[r] = C64::new(0.0, 0.0);
            }
        }
        worst
    }
}

/// Nonzero pattern reachable from `seeds` through the graph of the partial
/// `L`, in topological order (written to `stack[top..]`).
#[allow(clippy::too_many_arguments)]
fn reach(
    seeds: impl Iterator<Item = usize>,
    lower_orig: &Columns,
    pivot_of: &[usize],
    mark: &mut [usize],
    stamp: usize,
    stack: &mut [usize],
    dfs_stack: &mut Vec<(usize, usize)>,
) -> usize {
    let n = pivot_of.len();
    let mut top = n;
    for seed in seeds {
        if mark[seed] == stamp {
            continue;
        }
        mark[seed] = stamp;
        dfs_stack.push((seed, NONE));
        while let Some(&(node, cursor)) = dfs_stack.last() {
            let step = pivot_of[node];
            let range = if step == NONE { 0..0 } else { lower_orig.col(step) };
            let mut c = if cursor == NONE { range.start } else { cursor };
            let mut child = None;
            while c < range.end {
                let candidate = lower_orig.idx[c];
                c += 1;
                if mark[candidate] != stamp {
                    child = Some(candidate);
                    break;
                }
            }
            let last = dfs_stack.len() - 1;
            dfs_stack[last].1 = c;
            match child {
                Some(ch) => {
                    mark[ch] = stamp;
                    dfs_stack.push((ch, NONE));
                }
                None => {
                    dfs_stack.pop();
                    top -= 1;
                    stack[top] = node;
                }
            }
        }
    }
    top
}

/// Factors `a` after RCM reordering. Fails with [`Error::SingularMatrix`]
/// when no admissible pivot exceeds `PIVOT_TOLERANCE * max|A|`.
pub fn lu_factor(a: &CsrMatrix) -> Result<LuFactorization> {
    if a.nrows() != a.ncols() {
        return Err(Error::invalid(format!("LU needs a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    let col_perm = reverse_cuthill_mckee(a);
    // rows of the transpose are the columns of the reordered matrix
    let columns = a.permute_symmetric(&col_perm).transpose();
    let a_max = a.norm_max();
    let threshold = PIVOT_TOLERANCE * a_max;

    let mut pivot_of = vec![NONE; n];
    let mut lower = Columns { ptr: vec![0], ..Default::default() };
    let mut upper = Columns { ptr: vec![0], ..Default::default() };
    let mut diag = Vec::with_capacity(n);
    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut mark = vec![NONE; n];
    let mut stack = vec![0usize; n];
    let mut dfs_stack = Vec::new();
    let mut u_max: f64 = 0.0;

    for k in 0..n {
        let top = reach(columns.row(k).map(|(i, _)| i), &lower, &pivot_of, &mut mark, k, &mut stack, &mut dfs_stack);
        for &i in &stack[top..] {
            x[i] = C64::new(0.0, 0.0);
        }
        for (i, v) in columns.row(k) {
            x[i] = v;
        }
        for &j in &stack[top..] {
            let step = pivot_of[j];
            if step == NONE {
                continue;
            }
            let xj = x[j];
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            for p in lower.col(step) {
                x[lower.idx[p]] -= lower.val[p] * xj;
            }
        }

        let mut best = NONE;
        let mut best_abs = -1.0;
        for &i in &stack[top..] {
            if pivot_of[i] == NONE {
                let t = x[i].norm();
                if t > best_abs {
                    best_abs = t;
                    best = i;
                }
            } else if x[i] != C64::new(0.0, 0.0) {
                upper.idx.push(pivot_of[i]);
                upper.val.push(x[i]);
                u_max = u_max.max(x[i].norm());
            }
        }
        if best == NONE || best_abs <= threshold {
            return Err(Error::SingularMatrix { step: k, pivot: best_abs.max(0.0), threshold });
        }
        if pivot_of[k] == NONE && mark[k] == k && x[k].norm() >= DIAGONAL_PREFERENCE * best_abs {
            best = k;
        }
        let pivot = x[best];
        pivot_of[best] = k;
        diag.push(pivot);
        u_max = u_max.max(pivot.norm());
        for &i in &stack[top..] {
            if pivot_of[i] == NONE && x[i] != C64::new(0.0, 0.0) {
                lower.idx.push(i);
                lower.val.push(x[i] / pivot);
            }
        }
        lower.ptr.push(lower.idx.len());
        upper.ptr.push(upper.idx.len());
        for &i in &stack[top..] {
            x[i] = C64::new(0.0, 0.0);
        }
    }
    for idx in &mut lower.idx {
        *idx = pivot_of[*idx];
    }
    Ok(LuFactorization {
        n,
        col_perm,
        row_pivot: pivot_of,
        lower,
        upper,
        diag,
        pivot_growth: if a_max > 0.0 { u_max / a_max } else { 0.0 },
    })
}

pub fn lu_solve(factors: &LuFactorization, b: &[C64]) -> Result<Vec<C64>> {
    factors.solve(b)
}
