//! Lattice field models: the nearest-neighbour φ⁴ model and the disordered
//! XY model on periodic or anti-periodic cubic lattices.

mod phi4;
mod xy;

pub use phi4::{Phi4, DEFAULT_ENUMERATION_CAP};
pub use xy::{Boundary, Disorder, XyModel};
