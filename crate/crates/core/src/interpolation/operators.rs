use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::elements::{LocalSpace, SpaceKind};
use crate::error::{config, Error, Result};
use crate::mesh::TensorMesh;

use super::{DiscreteField, FeSpace};

/// Shared-dof agreement required between neighbouring cells.
const CONTINUITY_TOL: f64 = 1e-11;

/// 1-D node sequence of a Lagrange interpolant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeFamily {
    /// `ξ_i = -1 + 2i/p` (the operator `J^N`).
    Equidistant,
    /// Gauss-Lobatto points (the operator `I^N`).
    GaussLobatto,
}

/// The three interpolation operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolant {
    /// Vertex-edge-cell `π^N`.
    Vec,
    GaussLobatto,
    Equidistant,
}

impl Interpolant {
    pub fn name(self) -> &'static str {
        match self {
            Interpolant::Vec => "vec",
            Interpolant::GaussLobatto => "gl",
            Interpolant::Equidistant => "eq",
        }
    }
}

impl FromStr for Interpolant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vec" => Ok(Interpolant::Vec),
            "gl" => Ok(Interpolant::GaussLobatto),
            "eq" => Ok(Interpolant::Equidistant),
            other => config(format!("unknown interpolant `{other}`")),
        }
    }
}

/// Scalar field with point evaluation.
pub type ScalarFn<'a> = &'a (dyn Fn(f64, f64) -> f64 + Sync);

/// Computes local nodal values per cell in parallel and gathers them,
/// checking that shared dofs agree.
fn gather(space: &Arc<FeSpace>, local: impl Fn(usize, usize) -> Vec<f64> + Sync) -> Result<DiscreteField> {
    let nx = space.mesh.nx();
    let ny = space.mesh.ny();
    let per_cell: Vec<Vec<f64>> = (0..nx * ny).into_par_iter().map(|c| local(c % nx, c / nx)).collect();
    let n = space.dofs.n_dofs();
    let mut coeffs = vec![0.0; n];
    let mut seen = vec![false; n];
    for c in 0..nx * ny {
        let (i, j) = (c % nx, c / nx);
        for (g, &v) in space.dofs.cell_dofs(i, j).into_iter().zip(&per_cell[c]) {
            if seen[g] {
                let old = coeffs[g];
                if (old - v).abs() > CONTINUITY_TOL * old.abs().max(1.0) {
                    return Err(Error::Numerical(format!(
                        "interpolant discontinuous at dof {g} in cell ({i},{j}): {old} vs {v}"
                    )));
                }
            } else {
                coeffs[g] = v;
                seen[g] = true;
            }
        }
    }
    DiscreteField::new(space.clone(), coeffs)
}

/// Vertex-edge-cell interpolant `π^N f`.
pub fn interpolate_vec(f: ScalarFn<'_>, space: &Arc<FeSpace>) -> Result<DiscreteField> {
    gather(space, |i, j| {
        space.element.vec_interpolate(|xi, eta| {
            let (x, y) = space.to_physical(i, j, xi, eta);
            f(x, y)
        })
    })
}

/// Lagrange interpolant `J^N f` or `I^N f`.
pub fn interpolate_lagrange(f: ScalarFn<'_>, space: &Arc<FeSpace>, family: NodeFamily) -> Result<DiscreteField> {
    match family {
        NodeFamily::GaussLobatto => gather(space, |i, j| {
            space.cell_nodes(i, j).into_iter().map(|(x, y)| f(x, y)).collect()
        }),
        NodeFamily::Equidistant => gather(space, |i, j| {
            space.element.eq_interpolate(|xi, eta| {
                let (x, y) = space.to_physical(i, j, xi, eta);
                f(x, y)
            })
        }),
    }
}

pub fn interpolate(f: ScalarFn<'_>, space: &Arc<FeSpace>, which: Interpolant) -> Result<DiscreteField> {
    match which {
        Interpolant::Vec => interpolate_vec(f, space),
        Interpolant::GaussLobatto => interpolate_lagrange(f, space, NodeFamily::GaussLobatto),
        Interpolant::Equidistant => interpolate_lagrange(f, space, NodeFamily::Equidistant),
    }
}

/// Maximum discrepancy between `π_p f` and `I_p π_{p+1} f` on a sample grid
/// of `7 × 7` points per cell.
pub fn verify_connection_identity(f: ScalarFn<'_>, mesh: &TensorMesh, kind: SpaceKind, p: usize) -> Result<f64> {
    let sp = FeSpace::new(mesh.clone(), LocalSpace::new(p, kind)?)?;
    let sp1 = FeSpace::new(mesh.clone(), LocalSpace::new(p + 1, kind)?)?;
    let pi_p = interpolate_vec(f, &sp)?;
    let pi_p1 = interpolate_vec(f, &sp1)?;
    let composed = gather(&sp, |i, j| {
        sp.element
            .nodes()
            .iter()
            .map(|n| pi_p1.eval_cell(i, j, n.xi, n.eta)[0])
            .collect()
    })?;
    const S: usize = 7;
    let mut worst = 0.0f64;
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            for a in 0..S {
                for b in 0..S {
                    let xi = -1.0 + 2.0 * a as f64 / (S - 1) as f64;
                    let eta = -1.0 + 2.0 * b as f64 / (S - 1) as f64;
                    let d = pi_p.eval_cell(i, j, xi, eta)[0] - composed.eval_cell(i, j, xi, eta)[0];
                    worst = worst.max(d.abs());
                }
            }
        }
    }
    Ok(worst)
}
