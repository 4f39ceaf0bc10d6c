use crate::error::{check_point, Result};
use crate::problem::Problem;
use crate::validate::norm;

use super::linalg::{axpy, newton_direction, Direction};
use super::{eval_residual, newton, SolveOutcome, SolverConfig, Status, Tracer};

/// Corrector iterations at or below which the next step is lengthened.
const EASY_STEP: usize = 2;
const GROWTH: f64 = 1.5;

/// Tracks the Newton homotopy `H(x, t) = f(x) − (1 − t)·f(x₀)` from the
/// trivial zero `x₀` at `t = 0` to a root of `f` at `t = 1`.
///
/// Euler predictor along `J·ẋ = −f(x₀)`, undamped Newton corrector, adaptive
/// step: halve on corrector failure, grow after easy steps. The path end is
/// polished with damped Newton on `f`.
pub fn homotopy_track<P: Problem + ?Sized>(problem: &P, start: &[f64], cfg: &SolverConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    check_point(start, problem.dim())?;
    Ok(run(problem, start.to_vec(), cfg))
}

fn run<P: Problem + ?Sized>(problem: &P, start: Vec<f64>, cfg: &SolverConfig) -> SolveOutcome {
    let hp = &cfg.homotopy;
    let mut tracer = Tracer::new(cfg.trace);
    let Some(f0) = eval_residual(problem, &start) else {
        return tracer.finish(Status::EvalError, start, f64::NAN, 0);
    };
    let n0 = norm(&f0);
    tracer.push(0, &start, n0, 0.0);
    if n0 <= cfg.accept_tol {
        return tracer.finish(Status::Converged, start, n0, 0);
    }
    let corrector_tol = 1e-8 * (1.0 + n0);

    let mut x = start;
    let mut t = 0.0_f64;
    let mut dt = hp.initial_dt;
    let mut steps = 0;
    while t < 1.0 {
        if steps >= hp.max_steps {
            return tracer.finish(Status::MaxIters, x, f64::NAN, steps);
        }
        steps += 1;
        let jac = match problem.jacobian(&x) {
            Ok(j) => j,
            Err(_) => return tracer.finish(Status::EvalError, x, f64::NAN, steps),
        };
        let xdot = match newton_direction(&jac, &f0) {
            Direction::Solved(v) => v,
            Direction::Singular => return tracer.finish(Status::SingularStep, x, f64::NAN, steps),
        };
        let h = dt.min(1.0 - t);
        let t_next = if h >= 1.0 - t { 1.0 } else { t + h };

        match correct(problem, axpy(&x, h, &xdot), &f0, 1.0 - t_next, corrector_tol, hp.corrector_iters) {
            Some((xc, used)) => {
                x = xc;
                t = t_next;
                tracer.push(steps, &x, f64::NAN, t);
                if used <= EASY_STEP {
                    dt *= GROWTH;
                }
            }
            None => {
                dt *= 0.5;
                if dt < hp.min_dt {
                    return tracer.finish(Status::Diverged, x, f64::NAN, steps);
                }
            }
        }
    }

    let end = newton::run(problem, x, cfg, cfg.max_iters);
    let mut out = tracer.finish(end.status, end.point, end.residual_norm, steps + end.iterations);
    if let (Some(t), Some(tail)) = (&mut out.trace, end.trace) {
        t.extend(tail.into_iter().skip(1).map(|mut e| {
            e.iteration += steps;
            e
        }));
    }
    out
}

/// Undamped Newton on `H(·, t) = f − s·f₀` with `s = 1 − t`. Returns the
/// corrected point and the number of iterations used, or `None` if the
/// residual does not drop below `tol` within `iters` steps or grows.
fn correct<P: Problem + ?Sized>(
    problem: &P,
    mut x: Vec<f64>,
    f0: &[f64],
    s: f64,
    tol: f64,
    iters: usize,
) -> Option<(Vec<f64>, usize)> {
    let h_at = |x: &[f64]| -> Option<Vec<f64>> {
        let f = eval_residual(problem, x)?;
        Some(f.iter().zip(f0).map(|(a, b)| a - s * b).collect())
    };
    let mut h = h_at(&x)?;
    let mut hn = norm(&h);
    for k in 0..=iters {
        if hn <= tol {
            return Some((x, k));
        }
        if k == iters {
            break;
        }
        let jac = problem.jacobian(&x).ok()?;
        let Direction::Solved(d) = newton_direction(&jac, &h) else {
            return None;
        };
        x = axpy(&x, 1.0, &d);
        let hnext = h_at(&x)?;
        let nn = norm(&hnext);
        if !(nn < hn) {
            return None;
        }
        h = hnext;
        hn = nn;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Phi4;
    use crate::solvers::{newton_solve, Method};

    #[test]
    fn phi4_positive_basin() {
        let p = Phi4::with_defaults(2, 0.0).unwrap();
        let cfg = SolverConfig::new(Method::NewtonHomotopy);
        let out = homotopy_track(&p, &[3.0; 4], &cfg).unwrap();
        assert_eq!(out.status, Status::Converged);
        let nt = newton_solve(&p, &[3.0; 4], &cfg).unwrap();
        for (a, b) in out.point.iter().zip(&nt.point) {
            assert!((a - 20f64.sqrt()).abs() < 1e-9);
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn root_start_is_constant_path() {
        let p = Phi4::with_defaults(2, 0.5).unwrap();
        let cfg = SolverConfig::new(Method::NewtonHomotopy);
        let out = homotopy_track(&p, &[0.0; 4], &cfg).unwrap();
        assert_eq!(out.status, Status::Converged);
        assert_eq!(out.point, vec![0.0; 4]);
    }
}
