//! Solver laboratory for singularly perturbed convection-diffusion problems
//! on the unit square.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: S-type layer-adapted tensor meshes and macro meshes.
//! * [`elements`]: Gauss rules and the `Q_p` / serendipity reference spaces.
//! * [`interpolation`]: global dof numbering, discrete fields and the
//!   vertex-edge-cell, equidistant and Gauss-Lobatto interpolants.
//! * [`fem`]: Galerkin, SDFEM, LPS and modified SDFEM assembly and solve.
//! * [`norms`]: energy, balanced, SD and LPS error norms and convergence orders.
//! * [`postprocess`]: macro-cell recovery operators.
//! * [`fd`]: upwind finite differences, a-posteriori indicators and adaptivity.
//! * [`bench`]: manufactured problems and study drivers.

pub mod bench;
pub mod elements;
pub mod error;
pub mod fd;
pub mod fem;
pub mod interpolation;
pub(crate) mod linalg;
pub mod mesh;
pub mod norms;
pub mod postprocess;

pub use error::{Error, Result};
