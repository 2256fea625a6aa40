use std::sync::Arc;

use crate::elements::LocalSpace;
use crate::error::{config, Result};
use crate::mesh::TensorMesh;

use super::{DofMap, Element};

/// A conforming finite element space `V^N` over a tensor mesh.
#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: TensorMesh,
    pub element: Element,
    pub dofs: DofMap,
}

impl FeSpace {
    pub fn new(mesh: TensorMesh, space: LocalSpace) -> Result<Arc<Self>> {
        let dofs = DofMap::new(mesh.nx(), mesh.ny(), &space);
        let element = Element::new(space)?;
        Ok(Arc::new(Self { mesh, element, dofs }))
    }

    pub fn p(&self) -> usize {
        self.element.p()
    }

    /// Physical point of reference coordinates `(ξ, η)` in cell `(i, j)`.
    pub fn to_physical(&self, i: usize, j: usize, xi: f64, eta: f64) -> (f64, f64) {
        let m = &self.mesh;
        (m.x[i] + 0.5 * (xi + 1.0) * m.hx[i], m.y[j] + 0.5 * (eta + 1.0) * m.ky[j])
    }

    pub fn to_reference(&self, i: usize, j: usize, x: f64, y: f64) -> (f64, f64) {
        let m = &self.mesh;
        (2.0 * (x - m.x[i]) / m.hx[i] - 1.0, 2.0 * (y - m.y[j]) / m.ky[j] - 1.0)
    }

    /// Physical coordinates of the local nodes of cell `(i, j)`.
    pub fn cell_nodes(&self, i: usize, j: usize) -> Vec<(f64, f64)> {
        self.element.nodes().iter().map(|n| self.to_physical(i, j, n.xi, n.eta)).collect()
    }
}

/// A member of `V^N`, stored as Gauss-Lobatto nodal values.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    space: Arc<FeSpace>,
    pub coeffs: Vec<f64>,
}

impl DiscreteField {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dofs.n_dofs() {
            return config(format!(
                "coefficient vector has {} entries, space has {} dofs",
                coeffs.len(),
                space.dofs.n_dofs()
            ));
        }
        Ok(Self { space, coeffs })
    }

    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.dofs.n_dofs();
        Self { space, coeffs: vec![0.0; n] }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    /// Local nodal values on cell `(i, j)`.
    pub fn cell_values(&self, i: usize, j: usize) -> Vec<f64> {
        self.space.dofs.cell_dofs(i, j).into_iter().map(|g| self.coeffs[g]).collect()
    }

    /// Value and physical gradient at reference point `(ξ, η)` of cell `(i, j)`.
    pub fn eval_cell(&self, i: usize, j: usize, xi: f64, eta: f64) -> [f64; 3] {
        let s = &self.space;
        let local = self.cell_values(i, j);
        let (v, dx, dy) = s.element.shape_at(xi, eta);
        let dot = |a: &[f64]| a.iter().zip(&local).map(|(p, q)| p * q).sum::<f64>();
        [dot(&v), dot(&dx) * 2.0 / s.mesh.hx[i], dot(&dy) * 2.0 / s.mesh.ky[j]]
    }

    /// Value and gradient at a physical point.
    pub fn eval_with_grad(&self, x: f64, y: f64) -> [f64; 3] {
        let i = self.space.mesh.locate_x(x);
        let j = self.space.mesh.locate_y(y);
        let (xi, eta) = self.space.to_reference(i, j, x, y);
        self.eval_cell(i, j, xi, eta)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_with_grad(x, y)[0]
    }

    /// `a·self + other`, both on the same space.
    pub fn axpy(&self, a: f64, other: &DiscreteField) -> Result<DiscreteField> {
        if !Arc::ptr_eq(&self.space, &other.space) {
            return config("fields live on different spaces");
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(u, v)| a * u + v).collect();
        Ok(DiscreteField { space: self.space.clone(), coeffs })
    }

    /// Maximum nodal absolute difference to another field on the same space.
    pub fn max_coeff_diff(&self, other: &DiscreteField) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
    }
}
