//! Anisotropic refinement of a tensor grid driven by the indicators.

use std::path::Path;

use crate::error::{config, Result};
use crate::fem::Problem;
use crate::mesh::{build_stype_mesh, MeshFamily, MeshSpec};

use super::{compute_indicators, fd_solve, FDGrid, IndicatorForm};

/// Starting grid of the loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialGrid {
    Equidistant(usize),
    Shishkin { n: usize, sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptConfig {
    /// Marking threshold in `[0, 1]`.
    pub alpha: f64,
    /// The loop stops at the first grid with at least this many cells.
    pub max_dofs: usize,
    pub initial: InitialGrid,
    pub form: IndicatorForm,
    pub max_iterations: usize,
    /// Per-cell sampling of the `L∞` error of the bilinear interpolant.
    pub error_samples: usize,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            alpha: 0.9,
            max_dofs: 65536,
            initial: InitialGrid::Equidistant(4),
            form: IndicatorForm::Modified,
            max_iterations: 100_000,
            error_samples: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    X,
    Y,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::X => "x",
            Direction::Y => "y",
        }
    }
}

/// One solve of the loop; `refined` is the direction split afterwards.
/// `eta` sums all seven maxima in the configured form, `eta_tilde` the four modified ones.
#[derive(Debug, Clone)]
pub struct AdaptStep {
    pub iter: usize,
    pub nx: usize,
    pub ny: usize,
    pub dofs: usize,
    pub true_error: Option<f64>,
    pub eta: f64,
    pub eta_tilde: f64,
    pub refined: Option<Direction>,
    pub grid: FDGrid,
}

fn initial_grid(init: InitialGrid, epsilon: f64) -> Result<FDGrid> {
    match init {
        InitialGrid::Equidistant(n) => FDGrid::uniform(n, n),
        InitialGrid::Shishkin { n, sigma } => {
            let mesh = build_stype_mesh(&MeshSpec::new(MeshFamily::Shishkin, n, epsilon, sigma, 1.0))?;
            FDGrid::from_mesh(&mesh)
        }
    }
}

/// Splits every marked interval `[t_{k-1}, t_k]` (1-based `k`) at its midpoint.
fn bisect(nodes: &[f64], marked: &[bool]) -> Vec<f64> {
    let mut out = Vec::with_capacity(nodes.len() * 2);
    out.push(nodes[0]);
    for k in 1..nodes.len() {
        if marked[k] {
            out.push(0.5 * (nodes[k - 1] + nodes[k]));
        }
        out.push(nodes[k]);
    }
    out
}

/// Solve, estimate, refine, until the grid reaches `max_dofs` cells.
///
/// `M_x = max_{k=4..7} max M^k` and `M_y = max_{k=1,3} max M^k` choose the
/// direction. In `x`, every `i` with some `M^k_{ij} ≥ α max M^k`, `k ∈ 4..7`,
/// has `[x_{i-1}, x_i]` bisected; in `y` the same with `k ∈ 1..3`. Indicators
/// that vanish identically mark nothing. When nothing is marked, the interval
/// of the largest entry is bisected.
pub fn adapt_loop(problem: &Problem, cfg: &AdaptConfig) -> Result<Vec<AdaptStep>> {
    if !(0.0..=1.0).contains(&cfg.alpha) {
        return config(format!("alpha must lie in [0, 1], got {}", cfg.alpha));
    }
    let eps = problem.epsilon;
    let mut grid = initial_grid(cfg.initial, eps)?;
    let mut steps = Vec::new();
    for iter in 0..cfg.max_iterations {
        let u = fd_solve(problem, &grid)?;
        let rep = compute_indicators(&u, eps);
        let true_error = problem.exact.as_ref().map(|e| u.linf_error(e, cfg.error_samples));
        let mut step = AdaptStep {
            iter,
            nx: grid.n(),
            ny: grid.m(),
            dofs: grid.dofs(),
            true_error,
            eta: rep.maxima(cfg.form).iter().sum(),
            eta_tilde: rep.eta_tilde,
            refined: None,
            grid: grid.clone(),
        };
        if grid.dofs() >= cfg.max_dofs {
            steps.push(step);
            break;
        }
        let arrays = rep.arrays(cfg.form);
        let (mx, my) = rep.directional(cfg.form);
        let (dir, ks, len) = if mx > my { (Direction::X, 3..7, grid.x.len()) } else { (Direction::Y, 0..3, grid.y.len()) };
        let mut marked = vec![false; len];
        let mut best = (0.0, 1);
        for k in ks {
            let top = arrays[k].max();
            for (i, j, v) in arrays[k].entries() {
                let cell = if dir == Direction::X { i } else { j };
                // y-indicators live on j ∈ 1..=M, x-indicators on i ∈ 1..=N.
                if v > best.0 {
                    best = (v, cell);
                }
                if top > 0.0 && v >= cfg.alpha * top {
                    marked[cell] = true;
                }
            }
        }
        if !marked.iter().any(|&m| m) {
            marked[best.1] = true;
        }
        step.refined = Some(dir);
        steps.push(step);
        grid = match dir {
            Direction::X => FDGrid::new(bisect(&grid.x, &marked), grid.y.clone())?,
            Direction::Y => FDGrid::new(grid.x.clone(), bisect(&grid.y, &marked))?,
        };
    }
    Ok(steps)
}

/// Trace CSV: `iter,dofs,nx,ny,true_error,eta,eta_tilde,direction_refined`.
pub fn write_adapt_csv(steps: &[AdaptStep], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iter", "dofs", "nx", "ny", "true_error", "eta", "eta_tilde", "direction_refined"])?;
    for s in steps {
        w.write_record([
            s.iter.to_string(),
            s.dofs.to_string(),
            s.nx.to_string(),
            s.ny.to_string(),
            s.true_error.map_or(String::new(), |e| format!("{e:.6e}")),
            format!("{:.6e}", s.eta),
            format!("{:.6e}", s.eta_tilde),
            s.refined.map_or("none", Direction::name).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
