use crate::error::{check_point, Result};
use crate::problem::Problem;
use crate::validate::norm;

use super::linalg::{axpy, newton_direction, Direction};
use super::{eval_residual, SolveOutcome, SolverConfig, Status, Tracer};

/// Sufficient-decrease constant for the backtracking test
/// `‖f(x + αd)‖ ≤ (1 − c·α)‖f(x)‖`.
const ARMIJO: f64 = 1e-4;

/// Damped Newton on the residual map.
///
/// Each step solves `J·d = −f` and backtracks on `‖f‖`. Both the step and
/// the acceptance test are invariant under a positive rescaling of `f`, so
/// the iterates are too (up to where the absolute tolerance cuts in).
pub fn newton_solve<P: Problem + ?Sized>(problem: &P, start: &[f64], cfg: &SolverConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    check_point(start, problem.dim())?;
    Ok(run(problem, start.to_vec(), cfg, cfg.max_iters))
}

pub(crate) fn run<P: Problem + ?Sized>(problem: &P, start: Vec<f64>, cfg: &SolverConfig, max_iters: usize) -> SolveOutcome {
    let mut tracer = Tracer::new(cfg.trace);
    let mut x = start;
    let Some(mut f) = eval_residual(problem, &x) else {
        return tracer.finish(Status::EvalError, x, f64::NAN, 0);
    };
    let mut fnorm = norm(&f);
    tracer.push(0, &x, fnorm, 0.0);

    for it in 0..max_iters {
        if fnorm <= cfg.accept_tol {
            return tracer.finish(Status::Converged, x, fnorm, it);
        }
        let jac = match problem.jacobian(&x) {
            Ok(j) => j,
            Err(_) => return tracer.finish(Status::EvalError, x, fnorm, it),
        };
        let d = match newton_direction(&jac, &f) {
            Direction::Solved(d) => d,
            Direction::Singular => return tracer.finish(Status::SingularStep, x, fnorm, it),
        };

        let cap = cfg.damping.max_step * norm(&x).max(1.0);
        let mut alpha = cfg.damping.initial.min(cap / norm(&d));
        let mut only_errors = true;
        loop {
            if alpha < cfg.damping.min_step {
                let status = if only_errors { Status::EvalError } else { Status::Diverged };
                return tracer.finish(status, x, fnorm, it);
            }
            let trial = axpy(&x, alpha, &d);
            if let Some(ft) = eval_residual(problem, &trial) {
                only_errors = false;
                let tn = norm(&ft);
                if tn <= (1.0 - ARMIJO * alpha.min(1.0)) * fnorm {
                    x = trial;
                    f = ft;
                    fnorm = tn;
                    break;
                }
            }
            alpha *= cfg.damping.factor;
        }
        tracer.push(it + 1, &x, fnorm, alpha);
    }
    let status = if fnorm <= cfg.accept_tol { Status::Converged } else { Status::MaxIters };
    tracer.finish(status, x, fnorm, max_iters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{Cluster, PairKind};
    use crate::lattice::Phi4;
    use crate::solvers::Method;

    fn cfg() -> SolverConfig {
        SolverConfig { trace: true, ..SolverConfig::new(Method::Newton) }
    }

    #[test]
    fn phi4_decoupled_positive_root() {
        let p = Phi4::with_defaults(2, 0.0).unwrap();
        let out = newton_solve(&p, &[4.0; 4], &cfg()).unwrap();
        assert_eq!(out.status, Status::Converged);
        for v in &out.point {
            assert!((v - 20f64.sqrt()).abs() < 1e-9);
        }
        // quadratic tail
        let r: Vec<f64> = out.trace.unwrap().iter().map(|t| t.residual_norm).collect();
        for w in r.windows(2) {
            if w[1] > 1e-14 {
                assert!(w[1] / (w[0] * w[0]) < 10.0, "{r:?}");
            }
        }
    }

    #[test]
    fn exact_start_takes_no_iterations() {
        let p = Phi4::with_defaults(2, 0.0).unwrap();
        let out = newton_solve(&p, &[0.0; 4], &cfg()).unwrap();
        assert_eq!(out.status, Status::Converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.point, vec![0.0; 4]);
    }

    #[test]
    fn lj_dimer() {
        let c = Cluster::new(2, PairKind::lennard_jones()).unwrap();
        let out = newton_solve(&c, &[0.9], &cfg()).unwrap();
        assert_eq!(out.status, Status::Converged);
        assert!((out.point[0].abs() - 2f64.powf(1.0 / 6.0)).abs() < 1e-10);
    }

    #[test]
    fn wrong_length_is_an_error() {
        let p = Phi4::with_defaults(2, 0.0).unwrap();
        assert!(newton_solve(&p, &[0.0; 3], &cfg()).is_err());
    }
}
