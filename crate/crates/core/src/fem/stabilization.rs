use std::collections::HashMap;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use faer::Mat;

use crate::elements::{assembly_points, gauss_legendre_rule, LocalSpace};
use crate::error::{config, Error, Result};
use crate::linalg::max_generalized_eigenvalue;
use crate::mesh::{RegionTag, TensorMesh};

use super::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Galerkin,
    Sdfem,
    Lps,
    ModSdfem,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Galerkin => "galerkin",
            Method::Sdfem => "sdfem",
            Method::Lps => "lps",
            Method::ModSdfem => "modsdfem",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "galerkin" => Ok(Method::Galerkin),
            "sdfem" => Ok(Method::Sdfem),
            "lps" => Ok(Method::Lps),
            "modsdfem" => Ok(Method::ModSdfem),
            other => config(format!("unknown FEM method `{other}`")),
        }
    }
}

/// Leading constants of the parameter choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabConstants {
    pub c_sd: f64,
    pub c_lps: f64,
    /// Clamp SDFEM parameters to the coercivity bound.
    pub clamp: bool,
}

impl Default for StabConstants {
    fn default() -> Self {
        Self { c_sd: 1.0, c_lps: 0.001, clamp: true }
    }
}

/// Per-region stabilisation parameters.
///
/// `delta_ij` applies on `Ω_ij`. For the modified SDFEM the parameter is the
/// per-cell bubble of [`CellDelta::Bubble`] and the region constants are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizationPlan {
    pub method: Method,
    pub delta11: f64,
    pub delta21: f64,
    pub delta12: f64,
    pub delta22: f64,
    pub c_sd: f64,
    pub c_lps: f64,
    /// Inverse-inequality constant `‖Δv‖ ≤ μ h^{-1} ‖∇v‖`.
    pub mu: f64,
    pub clamp: bool,
    pub epsilon: f64,
}

/// Stabilisation parameter on one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellDelta {
    Zero,
    Constant(f64),
    /// `scale · (x1 - x)(x - x0) / (x1 - x0)²`.
    Bubble { scale: f64, x0: f64, x1: f64 },
}

impl CellDelta {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            CellDelta::Zero => 0.0,
            CellDelta::Constant(d) => d,
            CellDelta::Bubble { scale, x0, x1 } => {
                let h = x1 - x0;
                scale * (x1 - x) * (x - x0) / (h * h)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, CellDelta::Zero) || matches!(self, CellDelta::Constant(d) if *d == 0.0)
    }
}

impl StabilizationPlan {
    /// The all-zero plan of the Galerkin method.
    pub fn galerkin(epsilon: f64) -> Self {
        Self {
            method: Method::Galerkin,
            delta11: 0.0,
            delta21: 0.0,
            delta12: 0.0,
            delta22: 0.0,
            c_sd: 0.0,
            c_lps: 0.0,
            mu: 0.0,
            clamp: false,
            epsilon,
        }
    }

    fn region_delta(&self, tag: RegionTag) -> f64 {
        match tag {
            RegionTag::Omega11 => self.delta11,
            RegionTag::Omega12 => self.delta12,
            RegionTag::Omega21 => self.delta21,
            RegionTag::Omega22 => self.delta22,
        }
    }

    /// Parameter on cell `(i, j)`.
    pub fn cell_delta(&self, problem: &Problem, mesh: &TensorMesh, i: usize, j: usize) -> CellDelta {
        let (h, k) = (mesh.hx[i], mesh.ky[j]);
        match self.method {
            Method::Galerkin => CellDelta::Zero,
            Method::Lps => {
                let d = self.region_delta(mesh.region(i, j));
                if d == 0.0 { CellDelta::Zero } else { CellDelta::Constant(d) }
            }
            Method::Sdfem => {
                let mut d = self.region_delta(mesh.region(i, j));
                if d == 0.0 {
                    return CellDelta::Zero;
                }
                if self.clamp {
                    let c_max = cell_sup(mesh, i, j, |x, y| (problem.c)(x, y).abs());
                    let ht = h.min(k);
                    let mut bound = ht * ht / (self.mu * self.mu * self.epsilon);
                    if c_max > 0.0 {
                        bound = bound.min(problem.gamma / (c_max * c_max));
                    }
                    d = d.min(0.5 * bound);
                }
                CellDelta::Constant(d)
            }
            Method::ModSdfem => {
                let b_max = cell_sup(mesh, i, j, |x, y| (problem.b)(x, y).abs());
                let scale = (h / (2.0 * self.epsilon)).min(1.0 / b_max) * h;
                CellDelta::Bubble { scale, x0: mesh.x[i], x1: mesh.x[i + 1] }
            }
        }
    }
}

/// Supremum of `g` over cell `(i, j)`, sampled on a `9 × 9` grid including the boundary.
fn cell_sup(mesh: &TensorMesh, i: usize, j: usize, g: impl Fn(f64, f64) -> f64) -> f64 {
    const S: usize = 9;
    let mut m = 0.0f64;
    for a in 0..S {
        for b in 0..S {
            let x = mesh.x[i] + mesh.hx[i] * a as f64 / (S - 1) as f64;
            let y = mesh.y[j] + mesh.ky[j] * b as f64 / (S - 1) as f64;
            m = m.max(g(x, y));
        }
    }
    m
}

/// Builds the parameter plan of `method` on `mesh`.
///
/// SDFEM: `δ11 = C_SD/N`, `δ21 = C_SD ε^{-1/2} N^{-3}`.
/// LPS: `δ11 = C_LPS N^{-2} (max|ψ'|)^{2p}`, `δ21 = C_LPS ε^{-1/2} (ln N)^{-1} (N^{-1} max|ψ'|)²`.
/// `δ12 = δ22 = 0` for both.
pub fn make_stab_plan(
    method: Method,
    mesh: &TensorMesh,
    space: &LocalSpace,
    epsilon: f64,
    constants: StabConstants,
) -> Result<StabilizationPlan> {
    let n = mesh.nx() as f64;
    let mut plan = StabilizationPlan::galerkin(epsilon);
    plan.method = method;
    plan.c_sd = constants.c_sd;
    plan.c_lps = constants.c_lps;
    plan.clamp = constants.clamp;
    match method {
        Method::Galerkin => {}
        Method::Sdfem => {
            plan.delta11 = constants.c_sd / n;
            plan.delta21 = constants.c_sd / epsilon.sqrt() / (n * n * n);
            plan.mu = inverse_constant(space)?;
        }
        Method::Lps => {
            let family = mesh
                .family
                .ok_or_else(|| Error::Config("LPS parameters need an S-type mesh family".into()))?;
            let psi = family.max_abs_psi_prime(mesh.nx());
            let p = space.p() as i32;
            plan.delta11 = constants.c_lps * psi.powi(2 * p) / (n * n);
            plan.delta21 = constants.c_lps / epsilon.sqrt() / n.ln() * (psi / n).powi(2);
        }
        Method::ModSdfem => {
            plan.mu = inverse_constant(space)?;
        }
    }
    Ok(plan)
}

/// `μ` such that `‖Δv‖ ≤ μ h^{-1} ‖∇v‖` on a square cell of side `h`.
///
/// Largest generalized eigenvalue of the Laplacian and gradient Gram
/// matrices over the local space without constants; cached per space.
pub fn inverse_constant(space: &LocalSpace) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, Vec<i32>), f64>>> = OnceLock::new();
    let key = (space.p(), space.s_list().to_vec());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&mu) = cache.lock().unwrap().get(&key) {
        return Ok(mu);
    }
    let mono: Vec<usize> = (0..space.dimension()).filter(|&k| space.monomials()[k] != (0, 0)).collect();
    let n = mono.len();
    let mut lap = Mat::<f64>::zeros(n, n);
    let mut grad = Mat::<f64>::zeros(n, n);
    let rule = gauss_legendre_rule(assembly_points(space.p()))?;
    for (a, &xi) in rule.nodes.iter().enumerate() {
        for (b, &eta) in rule.nodes.iter().enumerate() {
            let w = rule.weights[a] * rule.weights[b];
            let bv = space.eval_basis(xi, eta);
            let (sxx, syy) = space.eval_second(xi, eta);
            for r in 0..n {
                let kr = mono[r];
                for c in 0..n {
                    let kc = mono[c];
                    lap[(r, c)] += w * (sxx[kr] + syy[kr]) * (sxx[kc] + syy[kc]);
                    grad[(r, c)] += w * (bv.d_xi[kr] * bv.d_xi[kc] + bv.d_eta[kr] * bv.d_eta[kc]);
                }
            }
        }
    }
    // Reference side length is 2.
    let mu = if n == 0 { 0.0 } else { 2.0 * max_generalized_eigenvalue(&lap, &grad)?.max(0.0).sqrt() };
    cache.lock().unwrap().insert(key, mu);
    Ok(mu)
}
