//! Superconvergent recovery on the 2×2 macro mesh.
//!
//! Every operator is a tensor product of a 1-D operator on a macro interval
//! `[x_{2k}, x_{2k+2}]` mapped onto `[-1, 1]`, where the shared fine node lands
//! at `a`. A 1-D operator samples its argument at fixed abscissae and maps the
//! samples linearly to the monomial coefficients of the result, so the 2-D
//! coefficients on a macro cell are `C_x V C_yᵀ` for the sample matrix `V`.
//!
//! Each 1-D operator reproduces `P_{p+1}` and matches the function at both
//! interval ends, so the glued result is continuous and reproduces
//! `Q_{p+1}` on every macro cell.

use faer::Mat;
use rayon::prelude::*;

use crate::elements::{gauss_legendre_rule, gauss_lobatto_points};
use crate::error::{config, Error, Result};
use crate::interpolation::DiscreteField;
use crate::linalg::DenseLu;
use crate::mesh::{locate, MacroMesh};
use crate::norms::Approximation;

/// Recovery operator selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostKind {
    Vec,
    GaussLobatto,
    Biquadratic,
}

impl PostKind {
    pub fn name(self) -> &'static str {
        match self {
            PostKind::Vec => "P_vec",
            PostKind::GaussLobatto => "P_GL",
            PostKind::Biquadratic => "P_biquad",
        }
    }
}

/// A 1-D operator on `[-1, 1]`: result coefficients are `coef · v(pts)`.
#[derive(Debug, Clone)]
pub struct Rule1d {
    pub pts: Vec<f64>,
    /// `(degree+1) × pts.len()`.
    pub coef: Mat<f64>,
}

impl Rule1d {
    pub fn degree(&self) -> usize {
        self.coef.nrows() - 1
    }

    /// Monomial coefficients of the image of `v`.
    pub fn apply(&self, v: impl Fn(f64) -> f64) -> Vec<f64> {
        let s: Vec<f64> = self.pts.iter().map(|&t| v(t)).collect();
        (0..self.coef.nrows()).map(|m| (0..s.len()).map(|q| self.coef[(m, q)] * s[q]).sum()).collect()
    }
}

/// Solves `A c = W s` for the functionals in `rows`, each given as weights over `pts`.
fn rule_from_functionals(pts: Vec<f64>, rows: Vec<Vec<f64>>, what: &str) -> Result<Rule1d> {
    let nb = rows.len();
    let mut a = Mat::<f64>::zeros(nb, nb);
    let mut w = Mat::<f64>::zeros(nb, pts.len());
    for (r, row) in rows.iter().enumerate() {
        for (q, &wq) in row.iter().enumerate() {
            w[(r, q)] = wq;
            let mut tp = 1.0;
            for m in 0..nb {
                a[(r, m)] += wq * tp;
                tp *= pts[q];
            }
        }
    }
    let lu = DenseLu::new(&a, what)?;
    Ok(Rule1d { pts, coef: lu.solve(&w) })
}

fn check_interior(a: f64) -> Result<()> {
    if !(a > -1.0 && a < 1.0) {
        return Err(Error::Numerical(format!("interior macro node maps to {a}, outside (-1, 1)")));
    }
    Ok(())
}

/// The `P_vec` conditions for a degree-`p` field, result degree `p+1`.
///
/// Endpoint and midpoint values, then for `p = 2` the first moment over
/// `[-1, 1]`; for `p ≥ 3` the integrals over `[-1, a]` and `[a, 1]` and the
/// moments against `t, …, t^{p-3}`. For `p = 1` only the three values remain.
///
/// For `p = 2` the plain integral would not do: `(t²-1)(t-a)` vanishes at the
/// three nodes and has integral `4a/3`, so equal fine intervals leave the cubic
/// undetermined. Its first moment is `-4/15` for every `a`.
pub fn vec_rule(p: usize, a: f64) -> Result<Rule1d> {
    if p == 0 {
        return config("P_vec needs p >= 1");
    }
    check_interior(a)?;
    let g = gauss_legendre_rule(p + 2)?;
    let (left, right) = (g.mapped(-1.0, a), g.mapped(a, 1.0));
    let mut pts = vec![-1.0, a, 1.0];
    pts.extend(&left.nodes);
    pts.extend(&right.nodes);
    let np = pts.len();
    let ng = g.nodes.len();
    let point = |k: usize| {
        let mut r = vec![0.0; np];
        r[k] = 1.0;
        r
    };
    let moment = |k: i32, use_left: bool, use_right: bool| {
        let mut r = vec![0.0; np];
        if use_left {
            for q in 0..ng {
                r[3 + q] = left.weights[q] * left.nodes[q].powi(k);
            }
        }
        if use_right {
            for q in 0..ng {
                r[3 + ng + q] = right.weights[q] * right.nodes[q].powi(k);
            }
        }
        r
    };
    let mut rows = vec![point(0), point(1), point(2)];
    match p {
        1 => {}
        2 => rows.push(moment(1, true, true)),
        _ => {
            rows.push(moment(0, true, false));
            rows.push(moment(0, false, true));
            for k in 1..=(p as i32 - 3) {
                rows.push(moment(k, true, true));
            }
        }
    }
    debug_assert_eq!(rows.len(), p + 2);
    rule_from_functionals(pts, rows, "P_vec conditions")
}

/// Indices `{0, 1, 3, …, 2p-1, 2p}` into the `2p+1` ordered Gauss-Lobatto
/// abscissae of the two fine intervals.
pub fn gl_indices(p: usize) -> Vec<usize> {
    let mut idx = vec![0];
    idx.extend((0..p).map(|k| 2 * k + 1));
    idx.push(2 * p);
    idx
}

/// Interpolation in `P_{p+1}` at the `gl_indices` subsample.
pub fn gl_rule(p: usize, a: f64) -> Result<Rule1d> {
    if p == 0 {
        return config("P_GL needs p >= 1");
    }
    check_interior(a)?;
    let gl = gauss_lobatto_points(p)?;
    let map = |t: f64, lo: f64, hi: f64| 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
    let mut all: Vec<f64> = gl.iter().map(|&t| map(t, -1.0, a)).collect();
    all.extend(gl.iter().skip(1).map(|&t| map(t, a, 1.0)));
    let pts: Vec<f64> = gl_indices(p).into_iter().map(|i| all[i]).collect();
    let rows = (0..pts.len())
        .map(|k| {
            let mut r = vec![0.0; pts.len()];
            r[k] = 1.0;
            r
        })
        .collect();
    rule_from_functionals(pts, rows, "P_GL interpolation")
}

/// Piecewise `Q_{p+1}` field on a macro mesh, monomials on each macro reference cell.
#[derive(Debug, Clone)]
pub struct MacroField {
    pub macro_mesh: MacroMesh,
    pub degree: usize,
    /// Per macro cell `(mi, mj)` at `mj * nx + mi`, coefficient of `ξ^a η^b` at `a * (degree+1) + b`.
    pub coeffs: Vec<Vec<f64>>,
}

impl MacroField {
    fn cell(&self, x: f64, y: f64) -> (usize, usize, f64, f64) {
        let m = &self.macro_mesh;
        let (i, j) = (locate(&m.x, x), locate(&m.y, y));
        let (x0, x1, y0, y1) = (m.x[i], m.x[i + 1], m.y[j], m.y[j + 1]);
        let xi = (2.0 * x - x0 - x1) / (x1 - x0);
        let eta = (2.0 * y - y0 - y1) / (y1 - y0);
        (i, j, xi, eta)
    }
}

/// Powers and their derivatives up to `deg`.
fn powers(t: f64, deg: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![1.0; deg + 1];
    let mut d = vec![0.0; deg + 1];
    for k in 1..=deg {
        v[k] = v[k - 1] * t;
        d[k] = k as f64 * v[k - 1];
    }
    (v, d)
}

impl Approximation for MacroField {
    fn value_grad(&self, x: f64, y: f64) -> [f64; 3] {
        let (i, j, xi, eta) = self.cell(x, y);
        let m = &self.macro_mesh;
        let n = self.degree + 1;
        let c = &self.coeffs[j * m.nx() + i];
        let (px, dpx) = powers(xi, self.degree);
        let (py, dpy) = powers(eta, self.degree);
        let mut out = [0.0; 3];
        for a in 0..n {
            for b in 0..n {
                let cab = c[a * n + b];
                out[0] += cab * px[a] * py[b];
                out[1] += cab * dpx[a] * py[b];
                out[2] += cab * px[a] * dpy[b];
            }
        }
        out[1] *= 2.0 / (m.x[i + 1] - m.x[i]);
        out[2] *= 2.0 / (m.y[j + 1] - m.y[j]);
        out
    }
}

/// Image of `f` under the tensor product of per-interval 1-D rules.
fn apply_tensor(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    macro_mesh: &MacroMesh,
    make_rule: &(dyn Fn(f64) -> Result<Rule1d> + Sync),
) -> Result<MacroField> {
    let interior = |nodes: &[f64], k: usize| {
        let (lo, mid, hi) = (nodes[2 * k], nodes[2 * k + 1], nodes[2 * k + 2]);
        (2.0 * mid - lo - hi) / (hi - lo)
    };
    let fine = &macro_mesh.fine;
    let rx: Vec<Rule1d> = (0..macro_mesh.nx()).map(|k| make_rule(interior(&fine.x, k))).collect::<Result<_>>()?;
    let ry: Vec<Rule1d> = (0..macro_mesh.ny()).map(|k| make_rule(interior(&fine.y, k))).collect::<Result<_>>()?;
    let degree = rx[0].degree();
    let n = degree + 1;
    let nx = macro_mesh.nx();
    let coeffs = (0..macro_mesh.cell_count())
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            let (x0, x1, y0, y1) = (macro_mesh.x[i], macro_mesh.x[i + 1], macro_mesh.y[j], macro_mesh.y[j + 1]);
            let (ax, ay) = (&rx[i], &ry[j]);
            let xs: Vec<f64> = ax.pts.iter().map(|&t| 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * t).collect();
            let ys: Vec<f64> = ay.pts.iter().map(|&t| 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * t).collect();
            // t = V C_yᵀ, then C_x t.
            let mut t = vec![0.0; xs.len() * n];
            for (q, &x) in xs.iter().enumerate() {
                let row: Vec<f64> = ys.iter().map(|&y| f(x, y)).collect();
                for b in 0..n {
                    t[q * n + b] = (0..ys.len()).map(|r| ay.coef[(b, r)] * row[r]).sum();
                }
            }
            let mut out = vec![0.0; n * n];
            for a in 0..n {
                for q in 0..xs.len() {
                    let w = ax.coef[(a, q)];
                    for b in 0..n {
                        out[a * n + b] += w * t[q * n + b];
                    }
                }
            }
            out
        })
        .collect();
    Ok(MacroField { macro_mesh: macro_mesh.clone(), degree, coeffs })
}

fn check_mesh(field: &DiscreteField, macro_mesh: &MacroMesh) -> Result<()> {
    let fm = &field.space().mesh;
    if fm.x != macro_mesh.fine.x || fm.y != macro_mesh.fine.y {
        return config("macro mesh was not built from the field's mesh");
    }
    Ok(())
}

/// Applies a recovery operator to any continuous function.
pub fn postprocess_fn(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    macro_mesh: &MacroMesh,
    kind: PostKind,
    p: usize,
) -> Result<MacroField> {
    match kind {
        PostKind::Vec => apply_tensor(f, macro_mesh, &|a| vec_rule(p, a)),
        PostKind::GaussLobatto => apply_tensor(f, macro_mesh, &|a| gl_rule(p, a)),
        PostKind::Biquadratic => {
            if p != 1 {
                return config(format!("biquadratic recovery needs p = 1, got {p}"));
            }
            apply_tensor(f, macro_mesh, &|a| vec_rule(1, a))
        }
    }
}

fn postprocess(field: &DiscreteField, macro_mesh: &MacroMesh, kind: PostKind) -> Result<MacroField> {
    check_mesh(field, macro_mesh)?;
    postprocess_fn(&|x, y| field.eval(x, y), macro_mesh, kind, field.space().p())
}

/// `P_vec`: a degree-`p` field to macro `Q_{p+1}`.
pub fn postprocess_vec(field: &DiscreteField, macro_mesh: &MacroMesh) -> Result<MacroField> {
    postprocess(field, macro_mesh, PostKind::Vec)
}

/// `P_GL`: macro `Q_{p+1}` interpolation at a Gauss-Lobatto subsample.
pub fn postprocess_gl(field: &DiscreteField, macro_mesh: &MacroMesh) -> Result<MacroField> {
    postprocess(field, macro_mesh, PostKind::GaussLobatto)
}

/// Biquadratic interpolation of a bilinear field through the 9 fine nodes of each macro cell.
pub fn postprocess_biquadratic(field: &DiscreteField, macro_mesh: &MacroMesh) -> Result<MacroField> {
    postprocess(field, macro_mesh, PostKind::Biquadratic)
}
