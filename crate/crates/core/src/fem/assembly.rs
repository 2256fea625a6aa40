use std::io::Write;
use std::sync::Arc;

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rayon::prelude::*;

use crate::error::{config, Error, Result};
use crate::interpolation::{DiscreteField, FeSpace};
use crate::linalg::DenseLu;

use super::{CellDelta, Method, Problem, StabilizationPlan};

/// Trial function given pointwise as `[w, w_x, w_y, w_xx, w_yy]`.
pub type TrialValues<'a> = &'a (dyn Fn(f64, f64) -> [f64; 5] + Sync);

/// Interior-dof system of one discretisation.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: SparseColMat<usize, f64>,
    pub rhs: Vec<f64>,
    pub space: Arc<FeSpace>,
}

impl LinearSystem {
    pub fn n(&self) -> usize {
        self.rhs.len()
    }

    /// Nonzeros as `(row, col, value)`.
    pub fn coo(&self) -> Vec<(usize, usize, f64)> {
        let m = self.matrix.as_ref();
        let (cp, ri, v) = (m.col_ptr(), m.row_idx(), m.val());
        let mut out = Vec::with_capacity(v.len());
        for c in 0..m.ncols() {
            for k in cp[c]..cp[c + 1] {
                out.push((ri[k], c, v[k]));
            }
        }
        out
    }

    /// Writes the matrix in coordinate text form, one `row col value` per line.
    pub fn write_coo(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "% {} {} {}", self.n(), self.n(), self.matrix.as_ref().val().len())?;
        for (r, c, v) in self.coo() {
            writeln!(w, "{r} {c} {v:.17e}")?;
        }
        Ok(())
    }

    /// `A x` for a free-dof vector.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        crate::linalg::sparse_apply(&self.matrix, x)
    }
}

/// Reference shape data at the tensor quadrature points.
struct ShapeTable {
    xi: Vec<f64>,
    eta: Vec<f64>,
    w: Vec<f64>,
    val: Vec<Vec<f64>>,
    dxi: Vec<Vec<f64>>,
    deta: Vec<Vec<f64>>,
    dxixi: Vec<Vec<f64>>,
    detaeta: Vec<Vec<f64>>,
    /// `P_{p-2}` monomials in reference coordinates at each point.
    proj: Vec<Vec<f64>>,
    /// Inverse reference mass matrix of `P_{p-2}`.
    proj_mass_inv: Option<Mat<f64>>,
}

impl ShapeTable {
    fn new(space: &FeSpace, with_projection: bool) -> Result<Self> {
        let el = &space.element;
        let rule = el.cell_rule();
        let p = el.p();
        let proj_exps: Vec<(i32, i32)> = if with_projection && p >= 2 {
            (0..=p as i32 - 2).flat_map(|a| (0..=p as i32 - 2 - a).map(move |b| (a, b))).collect()
        } else {
            Vec::new()
        };
        let mut t = ShapeTable {
            xi: vec![],
            eta: vec![],
            w: vec![],
            val: vec![],
            dxi: vec![],
            deta: vec![],
            dxixi: vec![],
            detaeta: vec![],
            proj: vec![],
            proj_mass_inv: None,
        };
        for (a, &xi) in rule.nodes.iter().enumerate() {
            for (b, &eta) in rule.nodes.iter().enumerate() {
                t.xi.push(xi);
                t.eta.push(eta);
                t.w.push(rule.weights[a] * rule.weights[b]);
                let (v, dx, dy) = el.shape_at(xi, eta);
                let (sxx, syy) = el.shape_second_at(xi, eta);
                t.val.push(v);
                t.dxi.push(dx);
                t.deta.push(dy);
                t.dxixi.push(sxx);
                t.detaeta.push(syy);
                t.proj.push(proj_exps.iter().map(|&(e1, e2)| xi.powi(e1) * eta.powi(e2)).collect());
            }
        }
        if !proj_exps.is_empty() {
            let np = proj_exps.len();
            let mut m = Mat::<f64>::zeros(np, np);
            for q in 0..t.w.len() {
                for r in 0..np {
                    for c in 0..np {
                        m[(r, c)] += t.w[q] * t.proj[q][r] * t.proj[q][c];
                    }
                }
            }
            let inv = DenseLu::new(&m, "LPS projection block").map_err(|e| {
                Error::Numerical(format!("{e} (quadrature too weak for P_(p-2) projection)"))
            })?;
            t.proj_mass_inv = Some(inv.inverse());
        }
        Ok(t)
    }

    fn n_points(&self) -> usize {
        self.w.len()
    }
}

/// Coefficient and test-function data of one cell.
struct CellData {
    dim: usize,
    eps: f64,
    /// Physical weights.
    w: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    f: Vec<f64>,
    delta: Vec<f64>,
    v: Vec<Vec<f64>>,
    gx: Vec<Vec<f64>>,
    gy: Vec<Vec<f64>>,
    lap: Vec<Vec<f64>>,
    /// LPS: constant `δ_τ`, reference weights scaled by `hk/4` and the test moments `r_k`.
    lps: Option<LpsCell>,
}

struct LpsCell {
    delta: f64,
    jac: f64,
    r: Vec<Vec<f64>>,
}

impl CellData {
    fn new(t: &ShapeTable, space: &FeSpace, problem: &Problem, plan: &StabilizationPlan, i: usize, j: usize) -> Self {
        let mesh = &space.mesh;
        let (h, k) = (mesh.hx[i], mesh.ky[j]);
        let jac = 0.25 * h * k;
        let (sx, sy) = (2.0 / h, 2.0 / k);
        let cd = plan.cell_delta(problem, mesh, i, j);
        let nq = t.n_points();
        let dim = space.element.dimension();
        let mut d = CellData {
            dim,
            eps: problem.epsilon,
            w: Vec::with_capacity(nq),
            x: Vec::with_capacity(nq),
            y: Vec::with_capacity(nq),
            b: Vec::with_capacity(nq),
            c: Vec::with_capacity(nq),
            f: Vec::with_capacity(nq),
            delta: Vec::with_capacity(nq),
            v: Vec::with_capacity(nq),
            gx: Vec::with_capacity(nq),
            gy: Vec::with_capacity(nq),
            lap: Vec::with_capacity(nq),
            lps: None,
        };
        let residual_delta = matches!(plan.method, Method::Sdfem | Method::ModSdfem);
        for q in 0..nq {
            let (x, y) = space.to_physical(i, j, t.xi[q], t.eta[q]);
            d.w.push(t.w[q] * jac);
            d.x.push(x);
            d.y.push(y);
            d.b.push((problem.b)(x, y));
            d.c.push((problem.c)(x, y));
            d.f.push((problem.f)(x, y));
            d.delta.push(if residual_delta { cd.at(x) } else { 0.0 });
            d.v.push(t.val[q].clone());
            d.gx.push(t.dxi[q].iter().map(|g| g * sx).collect());
            d.gy.push(t.deta[q].iter().map(|g| g * sy).collect());
            d.lap.push((0..dim).map(|m| t.dxixi[q][m] * sx * sx + t.detaeta[q][m] * sy * sy).collect());
        }
        if plan.method == Method::Lps {
            if let CellDelta::Constant(delta) = cd {
                let np = t.proj.first().map_or(0, Vec::len);
                let mut r = vec![vec![0.0; np]; dim];
                if np > 0 {
                    for q in 0..nq {
                        for m in 0..dim {
                            let g = d.b[q] * d.gx[q][m] * t.w[q];
                            for (a, pq) in t.proj[q].iter().enumerate() {
                                r[m][a] += g * pq;
                            }
                        }
                    }
                }
                d.lps = Some(LpsCell { delta, jac, r });
            }
        }
        d
    }

    /// `a_τ(w, φ_k)` for every test function `φ_k`, with the trial given at the
    /// quadrature points as `[w, w_x, w_y, Δw]`.
    fn apply(&self, t: &ShapeTable, trial: &[[f64; 4]]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let eps = self.eps;
        for (q, tr) in trial.iter().enumerate() {
            let wq = self.w[q];
            let [w, wx, wy, lap] = *tr;
            let conv = -self.b[q] * wx + self.c[q] * w;
            let sd = self.delta[q] * (eps * lap + self.b[q] * wx - self.c[q] * w) * self.b[q];
            let (v, gx, gy) = (&self.v[q], &self.gx[q], &self.gy[q]);
            for k in 0..self.dim {
                out[k] += wq * (eps * (wx * gx[k] + wy * gy[k]) + conv * v[k] + sd * gx[k]);
            }
        }
        if let (Some(lps), Some(minv)) = (&self.lps, &t.proj_mass_inv) {
            let np = minv.nrows();
            let mut rw = vec![0.0; np];
            let mut gg = vec![0.0; self.dim];
            for (q, tr) in trial.iter().enumerate() {
                let g = self.b[q] * tr[1] * t.w[q];
                for (a, pq) in t.proj[q].iter().enumerate() {
                    rw[a] += g * pq;
                }
                for k in 0..self.dim {
                    gg[k] += g * self.b[q] * self.gx[q][k];
                }
            }
            let coef: Vec<f64> = (0..np).map(|a| (0..np).map(|c| minv[(a, c)] * rw[c]).sum()).collect();
            for k in 0..self.dim {
                let proj: f64 = lps.r[k].iter().zip(&coef).map(|(r, c)| r * c).sum();
                out[k] += lps.delta * lps.jac * (gg[k] - proj);
            }
        } else if let Some(lps) = &self.lps {
            // p = 1: the projection space is empty and κ is the identity.
            for (q, tr) in trial.iter().enumerate() {
                let g = self.b[q] * tr[1] * t.w[q];
                for k in 0..self.dim {
                    out[k] += lps.delta * lps.jac * g * self.b[q] * self.gx[q][k];
                }
            }
        }
        out
    }

    fn shape_trial(&self, l: usize) -> Vec<[f64; 4]> {
        (0..self.w.len()).map(|q| [self.v[q][l], self.gx[q][l], self.gy[q][l], self.lap[q][l]]).collect()
    }

    /// Local matrix, row-major `[test][trial]`.
    fn matrix(&self, t: &ShapeTable) -> Vec<f64> {
        let mut a = vec![0.0; self.dim * self.dim];
        for l in 0..self.dim {
            let col = self.apply(t, &self.shape_trial(l));
            for k in 0..self.dim {
                a[k * self.dim + l] = col[k];
            }
        }
        a
    }

    fn rhs(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for q in 0..self.w.len() {
            let wf = self.w[q] * self.f[q];
            let sd = self.delta[q] * self.b[q];
            for k in 0..self.dim {
                out[k] += wf * (self.v[q][k] - sd * self.gx[q][k]);
            }
        }
        out
    }
}

fn check_plan(problem: &Problem, plan: &StabilizationPlan) -> Result<()> {
    if (problem.epsilon - plan.epsilon).abs() > 1e-15 * problem.epsilon {
        return config(format!(
            "stabilisation plan built for eps = {}, problem has eps = {}",
            plan.epsilon, problem.epsilon
        ));
    }
    Ok(())
}

/// Assembles the discrete system over the free (non-boundary) dofs.
pub fn assemble(problem: &Problem, space: &Arc<FeSpace>, plan: &StabilizationPlan) -> Result<LinearSystem> {
    check_plan(problem, plan)?;
    let table = ShapeTable::new(space, plan.method == Method::Lps)?;
    let (nx, ny) = (space.mesh.nx(), space.mesh.ny());
    let dofs = &space.dofs;
    let n = dofs.n_free();
    let locals: Vec<(Vec<usize>, Vec<f64>, Vec<f64>)> = (0..nx * ny)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            let cell = CellData::new(&table, space, problem, plan, i, j);
            (dofs.cell_dofs(i, j), cell.matrix(&table), cell.rhs())
        })
        .collect();
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; n];
    for (gdofs, a, f) in &locals {
        let dim = gdofs.len();
        for (k, &gk) in gdofs.iter().enumerate() {
            let Some(r) = dofs.free_index(gk) else { continue };
            rhs[r] += f[k];
            for (l, &gl) in gdofs.iter().enumerate() {
                let Some(c) = dofs.free_index(gl) else { continue };
                let v = a[k * dim + l];
                if v != 0.0 {
                    triplets.push(Triplet::new(r, c, v));
                }
            }
        }
    }
    let matrix = SparseColMat::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Numerical(format!("sparse matrix construction failed: {e:?}")))?;
    Ok(LinearSystem { matrix, rhs, space: space.clone() })
}

/// `a(u, v)` of the discretisation for two discrete fields.
pub fn bilinear_form(problem: &Problem, plan: &StabilizationPlan, u: &DiscreteField, v: &DiscreteField) -> Result<f64> {
    check_plan(problem, plan)?;
    let space = u.space();
    if !Arc::ptr_eq(space, v.space()) {
        return config("fields live on different spaces");
    }
    let table = ShapeTable::new(space, plan.method == Method::Lps)?;
    let (nx, ny) = (space.mesh.nx(), space.mesh.ny());
    Ok((0..nx * ny)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            let cell = CellData::new(&table, space, problem, plan, i, j);
            let (ul, vl) = (u.cell_values(i, j), v.cell_values(i, j));
            let a = cell.matrix(&table);
            let dim = ul.len();
            (0..dim).map(|k| vl[k] * (0..dim).map(|l| a[k * dim + l] * ul[l]).sum::<f64>()).sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum())
}

/// `a(w, v)` for a pointwise-given trial `w` and a discrete test `v`.
pub fn form_with_function(problem: &Problem, plan: &StabilizationPlan, w: TrialValues<'_>, v: &DiscreteField) -> Result<f64> {
    check_plan(problem, plan)?;
    let space = v.space();
    let table = ShapeTable::new(space, plan.method == Method::Lps)?;
    let (nx, ny) = (space.mesh.nx(), space.mesh.ny());
    Ok((0..nx * ny)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            let cell = CellData::new(&table, space, problem, plan, i, j);
            let trial: Vec<[f64; 4]> = cell
                .x
                .iter()
                .zip(&cell.y)
                .map(|(&x, &y)| {
                    let [a, ax, ay, axx, ayy] = w(x, y);
                    [a, ax, ay, axx + ayy]
                })
                .collect();
            let vals = cell.apply(&table, &trial);
            vals.iter().zip(v.cell_values(i, j)).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum())
}
