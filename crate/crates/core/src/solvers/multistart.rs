use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::problem::{wrap_angle, Metric, Problem, ProblemInstance};
use crate::stationary::{classify, dedup, Provenance, SolutionSet, StationaryPoint};

use super::{gradsq, homotopy, newton, Method, SolveOutcome, SolverConfig, StartPlan, Status};

/// Refuse campaigns larger than this many starts.
pub const MAX_STARTS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub starts: usize,
    pub converged: usize,
    pub diverged: usize,
    pub spurious: usize,
    pub eval_errors: usize,
    pub singular_steps: usize,
    pub max_iters: usize,
}

impl CampaignStats {
    fn record(&mut self, status: Status) {
        match status {
            Status::Converged => self.converged += 1,
            Status::Diverged => self.diverged += 1,
            Status::SpuriousMinimum => self.spurious += 1,
            Status::EvalError => self.eval_errors += 1,
            Status::SingularStep => self.singular_steps += 1,
            Status::MaxIters => self.max_iters += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub solutions: SolutionSet,
    pub stats: CampaignStats,
}

/// Start number `start_id` of a campaign.
///
/// Random starts draw from their own ChaCha8 stream `(seed, start_id)`, so a
/// start does not depend on which worker runs it or in what order. Grid
/// starts enumerate the tensor grid with the last coordinate fastest.
pub fn start_point<P: Problem + ?Sized>(problem: &P, plan: &StartPlan, seed: u64, start_id: usize) -> Vec<f64> {
    match plan {
        StartPlan::Random { .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(start_id as u64);
            problem.sample_start(&mut rng)
        }
        StartPlan::Grid { axis } => {
            let n = problem.dim();
            let k = axis.len();
            let mut x = vec![0.0; n];
            let mut rem = start_id;
            for slot in x.iter_mut().rev() {
                *slot = axis[rem % k];
                rem /= k;
            }
            x
        }
    }
}

fn solve_one<P: Problem + ?Sized>(problem: &P, start: Vec<f64>, cfg: &SolverConfig) -> SolveOutcome {
    match cfg.method {
        Method::Newton => newton::run(problem, start, cfg, cfg.max_iters),
        Method::GradSq => gradsq::gradsq_solve(problem, &start, cfg).expect("validated"),
        Method::NewtonHomotopy => homotopy::homotopy_track(problem, &start, cfg).expect("validated"),
    }
}

/// Runs the configured method from every start on a pool of `threads`
/// workers and deduplicates the converged endpoints.
///
/// The result depends only on the instance and `cfg`, never on `threads`.
pub fn multistart(instance: &ProblemInstance, cfg: &SolverConfig, threads: usize) -> Result<Campaign> {
    multistart_with(instance, cfg, threads, |_, _| {})
}

/// [`multistart`] with a hook that sees every start's outcome, in start order.
pub fn multistart_with(
    instance: &ProblemInstance,
    cfg: &SolverConfig,
    threads: usize,
    mut inspect: impl FnMut(usize, &SolveOutcome),
) -> Result<Campaign> {
    cfg.validate()?;
    let n = instance.dim();
    let count = match cfg.starts.count(n) {
        Some(c) if c <= MAX_STARTS => c,
        _ => return invalid(format!("start plan exceeds {MAX_STARTS} starts")),
    };
    if count == 0 {
        return invalid("a campaign needs at least one start");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| crate::error::Error::InvalidParameter(format!("thread pool: {e}")))?;

    let metric = instance.metric();
    let origin = cfg.method.origin();
    let results: Vec<(SolveOutcome, Option<StationaryPoint>)> = pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|id| {
                let start = start_point(instance, &cfg.starts, cfg.seed, id);
                let out = solve_one(instance, start, cfg);
                let sp = if out.converged() {
                    let mut coords = out.point.clone();
                    if metric == Metric::AngularMod2Pi {
                        coords.iter_mut().for_each(|v| *v = wrap_angle(*v));
                    }
                    classify(instance, &coords, &cfg.classify, Provenance::new(origin, cfg.seed, id as u64)).ok()
                } else {
                    None
                };
                (out, sp)
            })
            .collect()
    });

    let mut stats = CampaignStats { starts: count, ..Default::default() };
    let mut points = Vec::new();
    for (id, (out, sp)) in results.into_iter().enumerate() {
        inspect(id, &out);
        match sp {
            Some(sp) => {
                stats.record(out.status);
                points.push(sp);
            }
            None if out.converged() => stats.eval_errors += 1,
            None => stats.record(out.status),
        }
    }
    let solutions = dedup(&instance.label, points, cfg.dedup_tol, metric)?;
    Ok(Campaign { solutions, stats })
}
