//! Benchmark problems for stationary-point search on potential energy
//! landscapes, and the solvers that search them.
//!
//! Every family implements [`Problem`]: a scalar objective with gradient and
//! Hessian over its free variables. [`ProblemInstance`] wraps one labelled
//! member of any family; [`solvers::multistart`] runs a seeded campaign on it
//! and returns a deduplicated, classified [`SolutionSet`].
//!
//! ```
//! use spbench_core::{lattice::Phi4, solvers, ProblemInstance};
//!
//! let inst = ProblemInstance::new(Phi4::with_defaults(2, 0.0).unwrap());
//! let cfg = solvers::SolverConfig::new(solvers::Method::Newton)
//!     .with_starts(solvers::StartPlan::Grid { axis: vec![-5.0, 0.0, 5.0] });
//! let campaign = solvers::multistart(&inst, &cfg, 1).unwrap();
//! assert_eq!(campaign.solutions.len(), 81);
//! ```

pub mod cluster;
pub mod error;
pub mod game;
pub mod lattice;
pub mod problem;
pub mod puzzle;
pub mod solvers;
pub mod stationary;
pub mod validate;

pub use error::{Error, Result};
pub use problem::{wrap_angle, Family, Metric, Model, Problem, ProblemInstance};
pub use stationary::{
    classify, classify_point, dedup, hessian_signature, ClassifyConfig, HessianMode, Origin, Provenance,
    SolutionSet, StationaryPoint, ZeroTol,
};
pub use validate::{fd_gradient, fd_hessian, fd_jacobian, gradient_check};
