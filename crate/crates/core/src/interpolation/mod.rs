//! Global degrees of freedom, discrete fields and the interpolation
//! operators `π^N` (vertex-edge-cell), `J^N` (equidistant Lagrange) and
//! `I^N` (Gauss-Lobatto Lagrange).
//!
//! Global dofs are point values at the Gauss-Lobatto nodes of each cell:
//! 4 vertices, `p-1` nodes per edge and interior nodes `(ξ_{i+1}, η_{j+1})`
//! for the interior index set of the local space. Values on an edge fix the
//! degree-`p` trace, so fields are continuous.

mod dofmap;
mod element;
mod field;
mod operators;

pub use dofmap::DofMap;
pub use element::{Element, LocalNode, NodeEntity};
pub use field::{DiscreteField, FeSpace};
pub use operators::{
    interpolate, interpolate_lagrange, interpolate_vec, verify_connection_identity, Interpolant,
    NodeFamily,
};
