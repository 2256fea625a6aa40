use std::fmt;
use std::sync::Arc;

use crate::error::{config, Result};

/// A scalar coefficient `(x, y) ↦ value`.
pub type Coef = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Closed-form exact solution returning `[u, u_x, u_y, u_xx, u_yy]`.
pub type ExactFn = Arc<dyn Fn(f64, f64) -> [f64; 5] + Send + Sync>;

/// `-εΔu - b u_x + c u = f` on the unit square, `u = 0` on the boundary.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub epsilon: f64,
    /// Lower bound of `b`.
    pub beta: f64,
    /// Lower bound of `c + b_x / 2`.
    pub gamma: f64,
    pub b: Coef,
    pub b_x: Coef,
    pub c: Coef,
    pub f: Coef,
    pub exact: Option<ExactFn>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("epsilon", &self.epsilon)
            .field("beta", &self.beta)
            .field("gamma", &self.gamma)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl Problem {
    /// Samples `b ≥ β` and `c + b_x/2 ≥ γ` on a `50 × 50` grid.
    pub fn check_coefficients(&self) -> Result<()> {
        const S: usize = 50;
        for a in 0..S {
            for k in 0..S {
                let x = (a as f64 + 0.5) / S as f64;
                let y = (k as f64 + 0.5) / S as f64;
                let b = (self.b)(x, y);
                if b < self.beta * (1.0 - 1e-12) {
                    return config(format!("b({x},{y}) = {b} below beta = {}", self.beta));
                }
                let g = (self.c)(x, y) + 0.5 * (self.b_x)(x, y);
                if g < self.gamma * (1.0 - 1e-12) {
                    return config(format!("c + b_x/2 = {g} below gamma = {} at ({x},{y})", self.gamma));
                }
            }
        }
        Ok(())
    }

    pub fn exact_values(&self, x: f64, y: f64) -> Option<[f64; 5]> {
        self.exact.as_ref().map(|e| e(x, y))
    }
}
