//! Small dense linear algebra on top of faer.

use faer::linalg::solvers::{DenseSolveCore, PartialPivLu};
use faer::prelude::*;
use faer::sparse::SparseColMat;
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Pivot-ratio threshold below which a dense local system counts as singular.
pub(crate) const SINGULAR_PIVOT_RATIO: f64 = 1e-10;

pub(crate) struct DenseLu {
    lu: PartialPivLu<f64>,
}

impl DenseLu {
    pub(crate) fn new(a: &Mat<f64>, what: &str) -> Result<Self> {
        debug_assert_eq!(a.nrows(), a.ncols());
        let lu = a.partial_piv_lu();
        let u = lu.U();
        let n = u.nrows();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            let d = u[(i, i)].abs();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if n > 0 && !(lo > SINGULAR_PIVOT_RATIO * hi) {
            return Err(Error::Numerical(format!(
                "{what}: dense {n}x{n} system is singular (pivot ratio {:.3e})",
                lo / hi
            )));
        }
        Ok(Self { lu })
    }

    pub(crate) fn solve(&self, b: &Mat<f64>) -> Mat<f64> {
        self.lu.solve(b)
    }

    pub(crate) fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }

    pub(crate) fn inverse(&self) -> Mat<f64> {
        self.lu.inverse()
    }
}

/// Normwise backward error accepted after a sparse direct solve.
pub(crate) const RESIDUAL_TOL: f64 = 1e-10;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

/// `‖A‖∞`, the largest absolute row sum.
fn sparse_inf_norm(a: &SparseColMat<usize, f64>) -> f64 {
    let m = a.as_ref();
    let mut rows = vec![0.0; m.nrows()];
    for (&r, v) in m.row_idx().iter().zip(m.val()) {
        rows[r] += v.abs();
    }
    inf_norm(&rows)
}

/// `y = A x` for a column-compressed matrix.
pub(crate) fn sparse_apply(a: &SparseColMat<usize, f64>, x: &[f64]) -> Vec<f64> {
    let m = a.as_ref();
    let (cp, ri, v) = (m.col_ptr(), m.row_idx(), m.val());
    let mut y = vec![0.0; m.nrows()];
    for c in 0..m.ncols() {
        for k in cp[c]..cp[c + 1] {
            y[ri[k]] += v[k] * x[c];
        }
    }
    y
}

/// Sparse LU solve with up to three refinement steps.
///
/// Fails when the backward error `‖b - Ax‖∞ / (‖A‖∞ ‖x‖∞ + ‖b‖∞)` stays above
/// `RESIDUAL_TOL`. Layer-adapted systems have row scales spread over many
/// orders of magnitude, so `‖r‖ / ‖b‖` would reject accurate solutions.
pub(crate) fn sparse_solve(a: &SparseColMat<usize, f64>, rhs: &[f64], what: &str) -> Result<Vec<f64>> {
    let n = rhs.len();
    let bnorm = inf_norm(rhs);
    if n == 0 || bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let nnz = a.as_ref().val().len();
    let anorm = sparse_inf_norm(a);
    let lu = a
        .sp_lu()
        .map_err(|e| Error::Numerical(format!("{what}: sparse LU failed ({n} x {n}, {nnz} nonzeros): {e:?}")))?;
    let solve = |b: &[f64]| {
        let s = lu.solve(&Mat::from_fn(n, 1, |i, _| b[i]));
        (0..n).map(|i| s[(i, 0)]).collect::<Vec<f64>>()
    };
    let residual = |x: &[f64]| -> Vec<f64> { sparse_apply(a, x).iter().zip(rhs).map(|(ax, b)| b - ax).collect() };
    let backward = |x: &[f64], r: &[f64]| inf_norm(r) / (anorm * inf_norm(x) + bnorm);
    let mut x = solve(rhs);
    let mut r = residual(&x);
    for _ in 0..3 {
        if backward(&x, &r) <= RESIDUAL_TOL {
            break;
        }
        for (xi, di) in x.iter_mut().zip(solve(&r)) {
            *xi += di;
        }
        r = residual(&x);
    }
    let err = backward(&x, &r);
    if !(err <= RESIDUAL_TOL) {
        return Err(Error::Numerical(format!(
            "{what}: sparse solve backward error {err:.3e} exceeds {RESIDUAL_TOL:e} ({n} x {n}, {nnz} nonzeros)"
        )));
    }
    Ok(x)
}

/// Largest eigenvalue of the symmetric-definite pencil `a x = λ g x`.
pub(crate) fn max_generalized_eigenvalue(a: &Mat<f64>, g: &Mat<f64>) -> Result<f64> {
    let llt = g
        .llt(Side::Lower)
        .map_err(|_| Error::Numerical("generalized eigenproblem: metric not SPD".into()))?;
    let l = llt.L();
    let n = a.nrows();
    // c = L^{-1} a L^{-T}
    let mut c = a.clone();
    l.solve_lower_triangular_in_place(c.as_mut());
    let mut ct = c.transpose().to_owned();
    l.solve_lower_triangular_in_place(ct.as_mut());
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (ct[(i, j)] + ct[(j, i)]));
    let ev = sym
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Numerical("generalized eigenproblem did not converge".into()))?;
    Ok(ev.into_iter().fold(f64::NEG_INFINITY, f64::max))
}
