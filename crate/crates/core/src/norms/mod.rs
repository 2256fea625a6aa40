//! Error norms against closed-form solutions and convergence-order
//! arithmetic.
//!
//! Norms are integrated cell by cell on a tensor mesh with a Gauss rule of
//! `max(6, p+2)` points per direction unless stated otherwise.

mod orders;

pub use orders::{estimated_orders, fill_orders, ErrorRecord};

use rayon::prelude::*;

use crate::elements::{assembly_points, gauss_legendre_rule, QuadratureRule};
use crate::error::Result;
use crate::fem::{CellDelta, ExactFn, Method, Problem, StabilizationPlan};
use crate::interpolation::DiscreteField;
use crate::mesh::TensorMesh;

/// A function with point evaluation of value and gradient.
pub trait Approximation: Sync {
    /// `[v, v_x, v_y]` at `(x, y)`.
    fn value_grad(&self, x: f64, y: f64) -> [f64; 3];
}

impl Approximation for DiscreteField {
    fn value_grad(&self, x: f64, y: f64) -> [f64; 3] {
        self.eval_with_grad(x, y)
    }
}

/// Adapts a closed-form solution.
pub struct Exact<'a>(pub &'a ExactFn);

impl Approximation for Exact<'_> {
    fn value_grad(&self, x: f64, y: f64) -> [f64; 3] {
        let v = (self.0)(x, y);
        [v[0], v[1], v[2]]
    }
}

/// Pointwise difference `a - b`.
pub struct Diff<'a>(pub &'a dyn Approximation, pub &'a dyn Approximation);

impl Approximation for Diff<'_> {
    fn value_grad(&self, x: f64, y: f64) -> [f64; 3] {
        let (a, b) = (self.0.value_grad(x, y), self.1.value_grad(x, y));
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }
}

pub struct Zero;

impl Approximation for Zero {
    fn value_grad(&self, _: f64, _: f64) -> [f64; 3] {
        [0.0; 3]
    }
}

/// Closure adaptor.
pub struct FnApprox<F>(pub F);

impl<F: Fn(f64, f64) -> [f64; 3] + Sync> Approximation for FnApprox<F> {
    fn value_grad(&self, x: f64, y: f64) -> [f64; 3] {
        (self.0)(x, y)
    }
}

/// Squared `L2` norms of `v`, `v_x`, `v_y`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormParts {
    pub l2: f64,
    pub dx: f64,
    pub dy: f64,
}

impl NormParts {
    /// `(ε‖∇v‖² + γ‖v‖²)^{1/2}`.
    pub fn energy(&self, gamma: f64, epsilon: f64) -> f64 {
        (epsilon * (self.dx + self.dy) + gamma * self.l2).sqrt()
    }

    /// `(ε‖v_x‖² + ε^{1/2}‖v_y‖² + γ‖v‖²)^{1/2}`.
    pub fn balanced(&self, gamma: f64, epsilon: f64) -> f64 {
        (epsilon * self.dx + epsilon.sqrt() * self.dy + gamma * self.l2).sqrt()
    }
}

fn cell_points(mesh: &TensorMesh, rule: &QuadratureRule, i: usize, j: usize) -> Vec<(f64, f64, f64)> {
    let xr = rule.mapped(mesh.x[i], mesh.x[i + 1]);
    let yr = rule.mapped(mesh.y[j], mesh.y[j + 1]);
    let mut out = Vec::with_capacity(rule.len() * rule.len());
    for a in 0..xr.len() {
        for b in 0..yr.len() {
            out.push((xr.nodes[a], yr.nodes[b], xr.weights[a] * yr.weights[b]));
        }
    }
    out
}

/// Deterministic ordered sum of a per-cell quantity.
fn sum_cells<T: Send + Copy + Default + std::ops::Add<Output = T>>(mesh: &TensorMesh, f: impl Fn(usize, usize) -> T + Sync) -> T {
    let nx = mesh.nx();
    let parts: Vec<T> = (0..mesh.cell_count()).into_par_iter().map(|c| f(c % nx, c / nx)).collect();
    parts.into_iter().fold(T::default(), |a, b| a + b)
}

impl std::ops::Add for NormParts {
    type Output = NormParts;
    fn add(self, o: NormParts) -> NormParts {
        NormParts { l2: self.l2 + o.l2, dx: self.dx + o.dx, dy: self.dy + o.dy }
    }
}

/// Squared norms of `v` by cellwise Gauss quadrature with `n` points per direction.
pub fn norm_parts(v: &dyn Approximation, mesh: &TensorMesh, n: usize) -> Result<NormParts> {
    let rule = gauss_legendre_rule(n)?;
    Ok(sum_cells(mesh, |i, j| {
        let mut p = NormParts::default();
        for (x, y, w) in cell_points(mesh, &rule, i, j) {
            let [a, ax, ay] = v.value_grad(x, y);
            p.l2 += w * a * a;
            p.dx += w * ax * ax;
            p.dy += w * ay * ay;
        }
        p
    }))
}

fn field_points(field: &DiscreteField) -> usize {
    assembly_points(field.space().p())
}

/// `(ε‖∇(u-u^N)‖² + γ‖u-u^N‖²)^{1/2}`.
pub fn energy_error(exact: &ExactFn, field: &DiscreteField, gamma: f64, epsilon: f64) -> Result<f64> {
    let parts = norm_parts(&Diff(&Exact(exact), field), &field.space().mesh, field_points(field))?;
    Ok(parts.energy(gamma, epsilon))
}

/// Balanced-norm error `(ε‖e_x‖² + ε^{1/2}‖e_y‖² + γ‖e‖²)^{1/2}`.
pub fn balanced_error(exact: &ExactFn, field: &DiscreteField, gamma: f64, epsilon: f64) -> Result<f64> {
    let parts = norm_parts(&Diff(&Exact(exact), field), &field.space().mesh, field_points(field))?;
    Ok(parts.balanced(gamma, epsilon))
}

fn exact_of(problem: &Problem) -> Result<&ExactFn> {
    problem
        .exact
        .as_ref()
        .ok_or_else(|| crate::Error::Config(format!("problem `{}` has no exact solution", problem.name)))
}

/// SD-norm error: energy part plus `Σ_τ ‖δ^{1/2} b e_x‖²_τ`.
///
/// Also serves the modified SDFEM norm, whose `δ` is the cell bubble.
pub fn sd_norm_error(problem: &Problem, plan: &StabilizationPlan, field: &DiscreteField) -> Result<f64> {
    let exact = exact_of(problem)?;
    let mesh = &field.space().mesh;
    let n = field_points(field);
    let e = Diff(&Exact(exact), field);
    let base = norm_parts(&e, mesh, n)?.energy(problem.gamma, problem.epsilon);
    if !matches!(plan.method, Method::Sdfem | Method::ModSdfem) {
        return Ok(base);
    }
    let rule = gauss_legendre_rule(n)?;
    let stab = sum_cells(mesh, |i, j| {
        let d = plan.cell_delta(problem, mesh, i, j);
        if d.is_zero() {
            return 0.0;
        }
        cell_points(mesh, &rule, i, j)
            .into_iter()
            .map(|(x, y, w)| {
                let g = (problem.b)(x, y) * e.value_grad(x, y)[1];
                w * d.at(x) * g * g
            })
            .sum::<f64>()
    });
    Ok((base * base + stab).sqrt())
}

/// LPS-norm error: energy part plus `s(e, e)`.
pub fn lps_norm_error(problem: &Problem, plan: &StabilizationPlan, field: &DiscreteField) -> Result<f64> {
    let exact = exact_of(problem)?;
    let mesh = &field.space().mesh;
    let p = field.space().p();
    let n = field_points(field);
    let e = Diff(&Exact(exact), field);
    let base = norm_parts(&e, mesh, n)?.energy(problem.gamma, problem.epsilon);
    if plan.method != Method::Lps {
        return Ok(base);
    }
    let rule = gauss_legendre_rule(n)?;
    let exps: Vec<(i32, i32)> = if p >= 2 {
        (0..=p as i32 - 2).flat_map(|a| (0..=p as i32 - 2 - a).map(move |b| (a, b))).collect()
    } else {
        Vec::new()
    };
    let stab = sum_cells(mesh, |i, j| {
        let CellDelta::Constant(delta) = plan.cell_delta(problem, mesh, i, j) else {
            return 0.0;
        };
        fluctuation_sq(mesh, &rule, &exps, i, j, |x, y| (problem.b)(x, y) * e.value_grad(x, y)[1]) * delta
    });
    Ok((base * base + stab).sqrt())
}

/// `‖κ_τ g‖²_τ` with `κ_τ = id - (L2 projection onto span of ξ^a η^b)`.
pub(crate) fn fluctuation_sq(
    mesh: &TensorMesh,
    rule: &QuadratureRule,
    exps: &[(i32, i32)],
    i: usize,
    j: usize,
    g: impl Fn(f64, f64) -> f64,
) -> f64 {
    let np = exps.len();
    let mut m = faer::Mat::<f64>::zeros(np, np);
    let mut r = vec![0.0; np];
    let mut gg = 0.0;
    let (h, k) = (mesh.hx[i], mesh.ky[j]);
    for (x, y, w) in cell_points(mesh, rule, i, j) {
        let xi = 2.0 * (x - mesh.x[i]) / h - 1.0;
        let eta = 2.0 * (y - mesh.y[j]) / k - 1.0;
        let gv = g(x, y);
        gg += w * gv * gv;
        let q: Vec<f64> = exps.iter().map(|&(a, b)| xi.powi(a) * eta.powi(b)).collect();
        for a in 0..np {
            r[a] += w * gv * q[a];
            for b in 0..np {
                m[(a, b)] += w * q[a] * q[b];
            }
        }
    }
    if np == 0 {
        return gg;
    }
    let Ok(lu) = crate::linalg::DenseLu::new(&m, "fluctuation projection") else {
        return f64::NAN;
    };
    let c = lu.solve_vec(&r);
    gg - r.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>()
}

/// Sampled maximum of `|v|` on a `(s+1) × (s+1)` grid per cell including nodes.
pub fn linf_sampled(v: &dyn Approximation, mesh: &TensorMesh, s: usize) -> f64 {
    let nx = mesh.nx();
    let parts: Vec<f64> = (0..mesh.cell_count())
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            let mut m = 0.0f64;
            for a in 0..=s {
                for b in 0..=s {
                    let x = mesh.x[i] + mesh.hx[i] * a as f64 / s as f64;
                    let y = mesh.y[j] + mesh.ky[j] * b as f64 / s as f64;
                    m = m.max(v.value_grad(x, y)[0].abs());
                }
            }
            m
        })
        .collect();
    parts.into_iter().fold(0.0, f64::max)
}
