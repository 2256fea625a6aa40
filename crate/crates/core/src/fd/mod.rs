//! Upwind finite differences for `-ε Δu - (b u)_x + c u = f` with pointwise
//! a-posteriori indicators and anisotropic tensor-grid adaptation.
//!
//! Node indices follow the grid: `x_0 < … < x_N`, `y_0 < … < y_M`,
//! `h_i = x_i - x_{i-1}`, `k_j = y_j - y_{j-1}` (1-based steps) and
//! `ħ_i = (h_i + h_{i+1}) / 2` for interior `i`.

mod adapt;
mod green;
mod indicators;

pub use adapt::{adapt_loop, write_adapt_csv, AdaptConfig, AdaptStep, Direction, InitialGrid};
pub use green::{bessel_k0, bessel_k0_scaled, fundamental_solution_2d};
pub use indicators::{compute_indicators, IndicatorArray, IndicatorForm, IndicatorReport};

use faer::sparse::{SparseColMat, Triplet};
use rayon::prelude::*;

use crate::error::{config, Result};
use crate::fem::{ExactFn, Problem};
use crate::linalg::sparse_solve;
use crate::mesh::{locate, TensorMesh};

/// Tensor grid of the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct FDGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl FDGrid {
    /// Validates strictly increasing nodes from 0 to 1 with at least two cells per direction.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        for (name, v) in [("x", &x), ("y", &y)] {
            if v.len() < 3 {
                return config(format!("FD grid needs at least 2 cells in {name}"));
            }
            if v[0] != 0.0 || *v.last().unwrap() != 1.0 {
                return config(format!("FD grid {name} nodes must span [0, 1]"));
            }
            if v.windows(2).any(|w| !(w[1] > w[0])) {
                return config(format!("FD grid {name} nodes are not strictly increasing"));
            }
        }
        Ok(Self { x, y })
    }

    pub fn uniform(n: usize, m: usize) -> Result<Self> {
        Self::new(
            (0..=n).map(|i| i as f64 / n as f64).collect(),
            (0..=m).map(|j| j as f64 / m as f64).collect(),
        )
    }

    pub fn from_mesh(mesh: &TensorMesh) -> Result<Self> {
        Self::new(mesh.x.clone(), mesh.y.clone())
    }

    /// Number of cells in `x`.
    pub fn n(&self) -> usize {
        self.x.len() - 1
    }

    pub fn m(&self) -> usize {
        self.y.len() - 1
    }

    /// `N · M`, the degree-of-freedom count used for adaptation studies.
    pub fn dofs(&self) -> usize {
        self.n() * self.m()
    }

    /// `h_i` for `i ∈ 1..=N`.
    pub fn h(&self, i: usize) -> f64 {
        self.x[i] - self.x[i - 1]
    }

    /// `k_j` for `j ∈ 1..=M`.
    pub fn k(&self, j: usize) -> f64 {
        self.y[j] - self.y[j - 1]
    }

    /// `ħ_i` for `i ∈ 1..N`.
    pub fn hbar(&self, i: usize) -> f64 {
        0.5 * (self.h(i) + self.h(i + 1))
    }

    pub fn kbar(&self, j: usize) -> f64 {
        0.5 * (self.k(j) + self.k(j + 1))
    }

    pub fn kappa_h(&self) -> f64 {
        (1..=self.n()).map(|i| self.h(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn kappa_k(&self) -> f64 {
        (1..=self.m()).map(|j| self.k(j)).fold(f64::INFINITY, f64::min)
    }

    fn node(&self, i: usize, j: usize) -> usize {
        j * (self.n() + 1) + i
    }
}

/// Nodal values on an [`FDGrid`], zero on the boundary.
#[derive(Debug, Clone)]
pub struct FDField {
    pub grid: FDGrid,
    /// Value at `(x_i, y_j)` stored at `j (N+1) + i`.
    pub values: Vec<f64>,
}

impl FDField {
    pub fn zeros(grid: FDGrid) -> Self {
        let n = grid.x.len() * grid.y.len();
        Self { grid, values: vec![0.0; n] }
    }

    /// Builds a field from nodal samples of `f`, forcing zero boundary values.
    pub fn from_fn(grid: FDGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        let (n, m) = (out.grid.n(), out.grid.m());
        for j in 1..m {
            for i in 1..n {
                let k = out.grid.node(i, j);
                out.values[k] = f(out.grid.x[i], out.grid.y[j]);
            }
        }
        out
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.node(i, j)]
    }

    /// Bilinear interpolant `u^B` at `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        let (i, j) = (locate(&g.x, x), locate(&g.y, y));
        let s = (x - g.x[i]) / (g.x[i + 1] - g.x[i]);
        let t = (y - g.y[j]) / (g.y[j + 1] - g.y[j]);
        (1.0 - s) * (1.0 - t) * self.at(i, j)
            + s * (1.0 - t) * self.at(i + 1, j)
            + (1.0 - s) * t * self.at(i, j + 1)
            + s * t * self.at(i + 1, j + 1)
    }

    /// `max |u^B - u|` sampled on a `(samples+1)²` lattice per cell, nodes included.
    pub fn linf_error(&self, exact: &ExactFn, samples: usize) -> f64 {
        let g = &self.grid;
        let s = samples.max(1);
        (0..g.m())
            .into_par_iter()
            .map(|j| {
                let mut worst = 0.0f64;
                for i in 0..g.n() {
                    let (x0, x1, y0, y1) = (g.x[i], g.x[i + 1], g.y[j], g.y[j + 1]);
                    let corners = [self.at(i, j), self.at(i + 1, j), self.at(i, j + 1), self.at(i + 1, j + 1)];
                    for b in 0..=s {
                        let t = b as f64 / s as f64;
                        let y = y0 + t * (y1 - y0);
                        for a in 0..=s {
                            let r = a as f64 / s as f64;
                            let x = x0 + r * (x1 - x0);
                            let ub = (1.0 - r) * (1.0 - t) * corners[0]
                                + r * (1.0 - t) * corners[1]
                                + (1.0 - r) * t * corners[2]
                                + r * t * corners[3];
                            worst = worst.max((ub - exact(x, y)[0]).abs());
                        }
                    }
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Interior unknown index of node `(i, j)`, `i ∈ 1..N`, `j ∈ 1..M`.
fn unknown(grid: &FDGrid, i: usize, j: usize) -> usize {
    (j - 1) * (grid.n() - 1) + (i - 1)
}

/// The upwind system `-ε(D²_x + D²_y)u - D̃_x(b u) + c̃ u = f` on interior nodes.
///
/// `problem` is stored as `-ε Δu - b u_x + c u = f`; the divergence form of
/// the same operator has `c̃ = c + b_x`.
pub fn assemble_fd(problem: &Problem, grid: &FDGrid) -> (SparseColMat<usize, f64>, Vec<f64>) {
    let (n, m) = (grid.n(), grid.m());
    let eps = problem.epsilon;
    let size = (n - 1) * (m - 1);
    let mut trips = Vec::with_capacity(5 * size);
    let mut rhs = vec![0.0; size];
    for j in 1..m {
        let (kj, kj1, kb) = (grid.k(j), grid.k(j + 1), grid.kbar(j));
        let y = grid.y[j];
        for i in 1..n {
            let (hi, hi1, hb) = (grid.h(i), grid.h(i + 1), grid.hbar(i));
            let x = grid.x[i];
            let row = unknown(grid, i, j);
            let b_here = (problem.b)(x, y);
            let b_next = (problem.b)(grid.x[i + 1], y);
            let c_tilde = (problem.c)(x, y) + (problem.b_x)(x, y);
            let diag = eps / hb * (1.0 / hi1 + 1.0 / hi) + eps / kb * (1.0 / kj1 + 1.0 / kj) + b_here / hb + c_tilde;
            trips.push(Triplet::new(row, row, diag));
            let mut off = |ii: usize, jj: usize, v: f64| {
                if ii >= 1 && ii < n && jj >= 1 && jj < m {
                    trips.push(Triplet::new(row, unknown(grid, ii, jj), v));
                }
            };
            off(i + 1, j, -eps / (hb * hi1) - b_next / hb);
            off(i - 1, j, -eps / (hb * hi));
            off(i, j + 1, -eps / (kb * kj1));
            off(i, j - 1, -eps / (kb * kj));
            rhs[row] = (problem.f)(x, y);
        }
    }
    let a = SparseColMat::try_new_from_triplets(size, size, &trips).expect("stencil indices are in range");
    (a, rhs)
}

/// Solves the upwind scheme on `grid`.
pub fn fd_solve(problem: &Problem, grid: &FDGrid) -> Result<FDField> {
    let (a, rhs) = assemble_fd(problem, grid);
    let what = format!("upwind FD on {} x {} grid (min h {:.3e}, min k {:.3e})", grid.n(), grid.m(), grid.kappa_h(), grid.kappa_k());
    let sol = sparse_solve(&a, &rhs, &what)?;
    let mut field = FDField::zeros(grid.clone());
    for j in 1..grid.m() {
        for i in 1..grid.n() {
            let k = grid.node(i, j);
            field.values[k] = sol[unknown(grid, i, j)];
        }
    }
    Ok(field)
}
