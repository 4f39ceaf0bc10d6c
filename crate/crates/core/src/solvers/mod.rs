//! Root-finding and stationary-point engines over a [`Problem`]'s residual map.
//!
//! [`Problem`]: crate::problem::Problem

mod gradsq;
mod homotopy;
mod linalg;
mod multistart;
mod newton;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::stationary::{ClassifyConfig, Origin};

pub use gradsq::gradsq_solve;
pub use homotopy::homotopy_track;
pub use linalg::MAX_CONDITION;
pub use multistart::{multistart, multistart_with, start_point, Campaign, CampaignStats};
pub use newton::newton_solve;

/// The per-start solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Newton,
    #[serde(rename = "gradsq")]
    GradSq,
    NewtonHomotopy,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::GradSq => "gradsq",
            Method::NewtonHomotopy => "newton-homotopy",
        }
    }

    pub fn from_name(s: &str) -> Option<Method> {
        match s {
            "newton" => Some(Method::Newton),
            "gradsq" => Some(Method::GradSq),
            "newton-homotopy" | "homotopy" => Some(Method::NewtonHomotopy),
            _ => None,
        }
    }

    pub fn origin(self) -> Origin {
        match self {
            Method::Newton => Origin::Newton,
            Method::GradSq => Origin::GradSq,
            Method::NewtonHomotopy => Origin::NewtonHomotopy,
        }
    }
}

/// Short steps keep damped Newton close to the continuous Newton flow, whose
/// trajectories are exactly the Newton-homotopy paths.
const MAX_STEP_DEFAULT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Damping {
    pub initial: f64,
    pub factor: f64,
    pub min_step: f64,
    /// Newton steps are shortened to at most `max_step · max(1, ‖x‖)`.
    pub max_step: f64,
}

impl Default for Damping {
    fn default() -> Self {
        Damping {
            initial: 1.0,
            factor: 0.5,
            min_step: 1e-12,
            max_step: MAX_STEP_DEFAULT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomotopyParams {
    pub initial_dt: f64,
    pub min_dt: f64,
    pub corrector_iters: usize,
    /// Cap on predictor-corrector steps along one path.
    pub max_steps: usize,
}

impl Default for HomotopyParams {
    fn default() -> Self {
        HomotopyParams {
            initial_dt: 0.05,
            min_dt: 1e-8,
            corrector_iters: 5,
            max_steps: 5000,
        }
    }
}

/// Where campaign starts come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StartPlan {
    /// `count` draws from the family's sampling region.
    Random { count: usize },
    /// Tensor grid: every coordinate ranges over `axis`.
    Grid { axis: Vec<f64> },
}

impl StartPlan {
    /// Number of starts for a problem of dimension `n`, or `None` on overflow.
    pub fn count(&self, n: usize) -> Option<usize> {
        match self {
            StartPlan::Random { count } => Some(*count),
            StartPlan::Grid { axis } => {
                let exp = u32::try_from(n).ok()?;
                axis.len().checked_pow(exp)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    /// Residual norm at or below which a point is accepted as a root.
    pub accept_tol: f64,
    /// GradSq stops once `‖∇W‖` falls below this.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub damping: Damping,
    pub homotopy: HomotopyParams,
    pub starts: StartPlan,
    pub seed: u64,
    pub dedup_tol: f64,
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub trace: bool,
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        SolverConfig {
            method,
            accept_tol: 1e-10,
            grad_tol: 1e-12,
            max_iters: match method {
                Method::GradSq => 20_000,
                Method::Newton | Method::NewtonHomotopy => 100,
            },
            damping: Damping::default(),
            homotopy: HomotopyParams::default(),
            starts: StartPlan::Random { count: 100 },
            seed: 0,
            dedup_tol: 1e-6,
            classify: ClassifyConfig::default(),
            trace: false,
        }
    }

    pub fn with_starts(mut self, starts: StartPlan) -> Self {
        self.starts = starts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.accept_tol > 0.0) {
            return invalid("accept_tol must be positive");
        }
        if self.max_iters < 1 {
            return invalid("max_iters must be at least 1");
        }
        if !(self.grad_tol >= 0.0) || !(self.dedup_tol > 0.0) {
            return invalid("grad_tol must be non-negative and dedup_tol positive");
        }
        let d = &self.damping;
        if !(d.initial > 0.0 && d.factor > 0.0 && d.factor < 1.0 && d.min_step > 0.0 && d.max_step > 0.0) {
            return invalid("damping needs initial > 0, 0 < factor < 1, min_step > 0, max_step > 0");
        }
        let h = &self.homotopy;
        if !(h.initial_dt > 0.0 && h.min_dt > 0.0 && h.min_dt <= h.initial_dt) || h.corrector_iters < 1 || h.max_steps < 1 {
            return invalid("homotopy needs 0 < min_dt <= initial_dt and at least one corrector iteration");
        }
        self.classify.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    Diverged,
    MaxIters,
    /// GradSq stalled at a minimum of `W` with `W > accept_tol²`.
    SpuriousMinimum,
    EvalError,
    SingularStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub point: Vec<f64>,
    pub residual_norm: f64,
    /// Line-search step for Newton/GradSq, `t` for homotopy.
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: Status,
    pub point: Vec<f64>,
    pub residual_norm: f64,
    /// `W = ‖f‖²` at the returned point (GradSq only).
    pub w_value: Option<f64>,
    pub iterations: usize,
    pub trace: Option<Vec<TraceEntry>>,
}

impl SolveOutcome {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

pub(crate) struct Tracer(Option<Vec<TraceEntry>>);

impl Tracer {
    pub(crate) fn new(on: bool) -> Self {
        Tracer(on.then(Vec::new))
    }

    pub(crate) fn push(&mut self, iteration: usize, point: &[f64], residual_norm: f64, step: f64) {
        if let Some(t) = &mut self.0 {
            t.push(TraceEntry {
                iteration,
                point: point.to_vec(),
                residual_norm,
                step,
            });
        }
    }

    pub(crate) fn finish(
        self,
        status: Status,
        point: Vec<f64>,
        residual_norm: f64,
        iterations: usize,
    ) -> SolveOutcome {
        SolveOutcome {
            status,
            point,
            residual_norm,
            w_value: None,
            iterations,
            trace: self.0,
        }
    }
}

/// Residual evaluation that folds non-finite output into an error.
pub(crate) fn eval_residual<P: crate::problem::Problem + ?Sized>(p: &P, x: &[f64]) -> Option<Vec<f64>> {
    match p.residual(x) {
        Ok(f) if f.iter().all(|v| v.is_finite()) => Some(f),
        _ => None,
    }
}
