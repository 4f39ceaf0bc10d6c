//! The family-agnostic problem interface.
//!
//! Every benchmark family exposes a scalar objective `F(x)` over `n` free
//! variables together with its gradient and Hessian. Stationary points are
//! roots of the residual map, which for gradient systems is the gradient
//! itself. Root-type systems (Nash) override `residual`/`jacobian` and use
//! the merit function `½‖f‖²` as their objective.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::cluster::{Cluster, PairKind, Thomson};
use crate::error::Result;
use crate::game::NashSystem;
use crate::lattice::{Phi4, XyModel};
use crate::puzzle::PuzzleSystem;
use crate::validate::fd_hessian;

/// Central-difference step used when a family has no analytic Hessian.
pub const HESSIAN_FD_STEP: f64 = 1e-5;

/// Distance used to compare stationary points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Euclidean,
    /// Componentwise shortest arc modulo 2π.
    AngularMod2Pi,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let sq: f64 = match self {
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum(),
            Metric::AngularMod2Pi => a
                .iter()
                .zip(b)
                .map(|(x, y)| wrap_angle(x - y).powi(2))
                .sum(),
        };
        sq.sqrt()
    }
}

/// Maps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

pub trait Problem: Sync {
    /// Number of free variables.
    fn dim(&self) -> usize;

    fn energy(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Hessian of [`Problem::energy`]. Defaults to central differences of the
    /// analytic gradient.
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        fd_hessian(self, x, HESSIAN_FD_STEP)
    }

    fn has_analytic_hessian(&self) -> bool {
        false
    }

    /// The square system whose roots the solvers look for.
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.gradient(x)
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.hessian(x)
    }

    fn metric(&self) -> Metric {
        Metric::Euclidean
    }

    /// Draws one start point from the family's sampling region.
    fn sample_start(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..self.dim()).map(|_| rng.random_range(-1.0..=1.0)).collect()
    }

    /// Per-coordinate values for a `k`-point tensor grid of starts.
    fn grid_axis(&self, k: usize) -> Vec<f64> {
        linspace(-1.0, 1.0, k)
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..k)
            .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Phi4,
    Xy,
    Thomson,
    #[serde(rename = "lj")]
    LennardJones,
    Morse,
    Nash,
    Puzzle,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Phi4 => "phi4",
            Family::Xy => "xy",
            Family::Thomson => "thomson",
            Family::LennardJones => "lj",
            Family::Morse => "morse",
            Family::Nash => "nash",
            Family::Puzzle => "puzzle",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Some(match s {
            "phi4" => Family::Phi4,
            "xy" => Family::Xy,
            "thomson" => Family::Thomson,
            "lj" => Family::LennardJones,
            "morse" => Family::Morse,
            "nash" => Family::Nash,
            "puzzle" => Family::Puzzle,
            _ => return None,
        })
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Family-specific model data.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Phi4(Phi4),
    Xy(XyModel),
    Thomson(Thomson),
    Cluster(Cluster),
    Nash(NashSystem),
    Puzzle(PuzzleSystem),
}

macro_rules! delegate {
    ($self:expr, $m:ident => $body:expr) => {
        match $self {
            Model::Phi4($m) => $body,
            Model::Xy($m) => $body,
            Model::Thomson($m) => $body,
            Model::Cluster($m) => $body,
            Model::Nash($m) => $body,
            Model::Puzzle($m) => $body,
        }
    };
}

impl Model {
    pub fn family(&self) -> Family {
        match self {
            Model::Phi4(_) => Family::Phi4,
            Model::Xy(_) => Family::Xy,
            Model::Thomson(_) => Family::Thomson,
            Model::Cluster(c) => match c.kind() {
                PairKind::LennardJones { .. } => Family::LennardJones,
                PairKind::Morse { .. } => Family::Morse,
            },
            Model::Nash(_) => Family::Nash,
            Model::Puzzle(_) => Family::Puzzle,
        }
    }

    pub fn default_label(&self) -> String {
        delegate!(self, m => m.default_label())
    }
}

impl Problem for Model {
    fn dim(&self) -> usize {
        delegate!(self, m => m.dim())
    }
    fn energy(&self, x: &[f64]) -> Result<f64> {
        delegate!(self, m => m.energy(x))
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        delegate!(self, m => m.gradient(x))
    }
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        delegate!(self, m => m.hessian(x))
    }
    fn has_analytic_hessian(&self) -> bool {
        delegate!(self, m => m.has_analytic_hessian())
    }
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        delegate!(self, m => m.residual(x))
    }
    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        delegate!(self, m => m.jacobian(x))
    }
    fn metric(&self) -> Metric {
        delegate!(self, m => m.metric())
    }
    fn sample_start(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        delegate!(self, m => m.sample_start(rng))
    }
    fn grid_axis(&self, k: usize) -> Vec<f64> {
        delegate!(self, m => m.grid_axis(k))
    }
}

/// A labelled, fully parameterized member of one benchmark family.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub label: String,
    pub model: Model,
}

impl ProblemInstance {
    pub fn new(model: impl Into<Model>) -> Self {
        let model = model.into();
        ProblemInstance {
            label: model.default_label(),
            model,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn family(&self) -> Family {
        self.model.family()
    }
}

impl Problem for ProblemInstance {
    fn dim(&self) -> usize {
        self.model.dim()
    }
    fn energy(&self, x: &[f64]) -> Result<f64> {
        self.model.energy(x)
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.model.gradient(x)
    }
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.model.hessian(x)
    }
    fn has_analytic_hessian(&self) -> bool {
        self.model.has_analytic_hessian()
    }
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.model.residual(x)
    }
    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.model.jacobian(x)
    }
    fn metric(&self) -> Metric {
        self.model.metric()
    }
    fn sample_start(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.model.sample_start(rng)
    }
    fn grid_axis(&self, k: usize) -> Vec<f64> {
        self.model.grid_axis(k)
    }
}

macro_rules! impl_from_model {
    ($($ty:ident => $variant:ident),*) => {
        $(impl From<$ty> for Model {
            fn from(m: $ty) -> Model {
                Model::$variant(m)
            }
        })*
    };
}

impl_from_model!(Phi4 => Phi4, XyModel => Xy, Thomson => Thomson, Cluster => Cluster,
    NashSystem => Nash, PuzzleSystem => Puzzle);
