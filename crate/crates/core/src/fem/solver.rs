use crate::error::Result;
use crate::interpolation::DiscreteField;
use crate::linalg::sparse_solve;

use super::LinearSystem;

/// Sparse LU solve; boundary dofs are set to zero.
pub fn solve(system: &LinearSystem) -> Result<DiscreteField> {
    let dofs = &system.space.dofs;
    let x = sparse_solve(&system.matrix, &system.rhs, "FEM system")?;
    let mut coeffs = vec![0.0; dofs.n_dofs()];
    for (g, c) in coeffs.iter_mut().enumerate() {
        if let Some(k) = dofs.free_index(g) {
            *c = x[k];
        }
    }
    DiscreteField::new(system.space.clone(), coeffs)
}
