//! Atomic and charged-particle clusters: Thomson electrons on the unit
//! sphere, and Lennard-Jones / Morse clusters in ℝ³.
//!
//! Both use coordinate fixings that remove rigid-body symmetries, so the
//! free-variable vector is shorter than `3N`.

mod atoms;
mod pair;
mod thomson;

pub use atoms::Cluster;
pub use pair::{pair_curvature, CurvatureEval, PairKind};
pub use thomson::Thomson;

/// Pair separations below this are treated as coincident particles.
pub const MIN_SEPARATION: f64 = 1e-12;

pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
