//! Reference-element machinery on `[-1,1]²`: Gauss rules and the polynomial
//! spaces `Q_p`, `Q_p⊕` and their common generalisation.

mod quadrature;
mod space;

pub use quadrature::{
    assembly_points, gauss_legendre_rule, gauss_lobatto_points, legendre, QuadratureRule,
};
pub use space::{BasisValues, LocalSpace, SpaceKind, MAX_DEGREE};
