use crate::error::{check_point, Result};
use crate::problem::Problem;
use crate::validate::norm;

use super::linalg::axpy;
use super::{eval_residual, SolveOutcome, SolverConfig, Status, Tracer};

const ARMIJO: f64 = 1e-4;

/// Line-search halvings before a step is declared impossible.
const MAX_BACKTRACKS: usize = 80;

/// `W` is considered stalled when it drops by less than `STALL_REL · W`
/// over `STALL_WINDOW` accepted steps.
const STALL_WINDOW: usize = 200;
const STALL_REL: f64 = 1e-9;

/// Gradient descent on `W(x) = ‖f(x)‖²` with `∇W = 2Jᵀf`.
///
/// Trial steps use the Barzilai-Borwein length and are backtracked until
/// the Armijo condition holds. The terminal point is a root only when
/// `W ≤ accept_tol²`; a stationary point of `W` above that is reported as
/// [`Status::SpuriousMinimum`]. Besides `‖∇W‖ ≤ grad_tol`, a run also ends
/// at a minimum of `W` when descent stalls: no relative progress over a
/// window of steps, or no acceptable step at all.
pub fn gradsq_solve<P: Problem + ?Sized>(problem: &P, start: &[f64], cfg: &SolverConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    check_point(start, problem.dim())?;
    Ok(run(problem, start.to_vec(), cfg))
}

fn merit_gradient<P: Problem + ?Sized>(problem: &P, x: &[f64], f: &[f64]) -> Option<Vec<f64>> {
    let j = problem.jacobian(x).ok()?;
    let g: Vec<f64> = (0..x.len())
        .map(|c| 2.0 * (0..f.len()).map(|r| j[(r, c)] * f[r]).sum::<f64>())
        .collect();
    g.iter().all(|v| v.is_finite()).then_some(g)
}

fn run<P: Problem + ?Sized>(problem: &P, start: Vec<f64>, cfg: &SolverConfig) -> SolveOutcome {
    let tol_w = cfg.accept_tol * cfg.accept_tol;
    let mut tracer = Tracer::new(cfg.trace);
    let mut x = start;
    let finish = |tracer: Tracer, status, x: Vec<f64>, w: f64, it| {
        let mut out = tracer.finish(status, x, w.sqrt(), it);
        out.w_value = Some(w);
        out
    };

    let Some(f) = eval_residual(problem, &x) else {
        return finish(tracer, Status::EvalError, x, f64::NAN, 0);
    };
    let mut w = f.iter().map(|v| v * v).sum::<f64>();
    let Some(mut g) = merit_gradient(problem, &x, &f) else {
        return finish(tracer, Status::EvalError, x, w, 0);
    };
    tracer.push(0, &x, w.sqrt(), 0.0);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut history = std::collections::VecDeque::with_capacity(STALL_WINDOW + 1);

    for it in 0..cfg.max_iters {
        if w <= tol_w {
            return finish(tracer, Status::Converged, x, w, it);
        }
        let gnorm = norm(&g);
        if gnorm <= cfg.grad_tol {
            return finish(tracer, Status::SpuriousMinimum, x, w, it);
        }
        history.push_back(w);
        if history.len() > STALL_WINDOW {
            let old = history.pop_front().unwrap_or(w);
            if old - w <= STALL_REL * w {
                return finish(tracer, Status::SpuriousMinimum, x, w, it);
            }
        }

        let mut alpha = match &prev {
            Some((s, y)) => {
                let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
                let ss: f64 = s.iter().map(|a| a * a).sum();
                if sy > 0.0 {
                    ss / sy
                } else {
                    1.0 / gnorm
                }
            }
            None => cfg.damping.initial.min(1.0 / gnorm),
        };
        let gg = gnorm * gnorm;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = axpy(&x, -alpha, &g);
            if let Some(ft) = eval_residual(problem, &trial) {
                let wt = ft.iter().map(|v| v * v).sum::<f64>();
                if wt <= w - ARMIJO * alpha * gg {
                    accepted = Some((trial, ft, wt));
                    break;
                }
            }
            alpha *= cfg.damping.factor;
        }
        let Some((xn, fnew, wn)) = accepted else {
            // No descent left at working precision: the point is as
            // stationary for W as it is going to get.
            return finish(tracer, Status::SpuriousMinimum, x, w, it);
        };
        let Some(gn) = merit_gradient(problem, &xn, &fnew) else {
            return finish(tracer, Status::EvalError, x, w, it);
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        prev = Some((s, y));
        x = xn;
        w = wn;
        g = gn;
        tracer.push(it + 1, &x, w.sqrt(), alpha);
    }
    let status = if w <= tol_w { Status::Converged } else { Status::MaxIters };
    finish(tracer, status, x, w, cfg.max_iters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Phi4;
    use crate::solvers::Method;
    use nalgebra::DMatrix;

    /// `f(x) = x² + 1`: W has its only minimum at 0 with W = 1.
    struct NoRealRoot;

    impl Problem for NoRealRoot {
        fn dim(&self) -> usize {
            1
        }
        fn energy(&self, x: &[f64]) -> Result<f64> {
            Ok(x[0].powi(3) / 3.0 + x[0])
        }
        fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![x[0] * x[0] + 1.0])
        }
        fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
            Ok(DMatrix::from_element(1, 1, 2.0 * x[0]))
        }
    }

    #[test]
    fn spurious_minimum_without_real_root() {
        let out = gradsq_solve(&NoRealRoot, &[1.7], &SolverConfig::new(Method::GradSq)).unwrap();
        assert_eq!(out.status, Status::SpuriousMinimum);
        assert!(out.point[0].abs() < 1e-6);
        assert!((out.w_value.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn true_root_basin() {
        let p = Phi4::with_defaults(2, 0.0).unwrap();
        let out = gradsq_solve(&p, &[4.3, 4.6, 4.4, 4.5], &SolverConfig::new(Method::GradSq)).unwrap();
        assert_eq!(out.status, Status::Converged);
        assert!(out.w_value.unwrap() <= 1e-20);
    }

    #[test]
    fn monotone_cubic_single_site() {
        // 0.1x³ + 2x: the only real root is 0
        let p = Phi4::new(1, 0.6, -2.0, 1.0).unwrap();
        let out = gradsq_solve(&p, &[7.5], &SolverConfig::new(Method::GradSq)).unwrap();
        assert_eq!(out.status, Status::Converged);
        assert!(out.point[0].abs() < 1e-9);
    }
}
