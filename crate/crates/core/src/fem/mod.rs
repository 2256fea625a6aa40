//! Galerkin, streamline-diffusion (SDFEM), local-projection (LPS) and
//! modified streamline-diffusion discretisations of
//! `-εΔu - b u_x + c u = f` with homogeneous Dirichlet data.

mod assembly;
mod problem;
mod solver;
mod stabilization;

pub use assembly::{assemble, bilinear_form, form_with_function, LinearSystem, TrialValues};
pub use problem::{Coef, ExactFn, Problem};
pub use solver::solve;
pub use stabilization::{
    inverse_constant, make_stab_plan, CellDelta, Method, StabConstants, StabilizationPlan,
};
