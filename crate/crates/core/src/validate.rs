//! Finite-difference oracles for checking analytic derivatives.

use nalgebra::DMatrix;

use crate::error::{check_point, invalid, Error, Result};
use crate::problem::Problem;

/// Central-difference gradient of the energy,
/// `(F(p + h·eᵢ) − F(p − h·eᵢ)) / 2h`.
pub fn fd_gradient<P: Problem + ?Sized>(problem: &P, p: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return invalid(format!("finite-difference step must be positive, got {h}"));
    }
    check_point(p, problem.dim())?;
    let mut x = p.to_vec();
    let mut g = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        x[i] = p[i] + h;
        let fp = problem.energy(&x)?;
        x[i] = p[i] - h;
        let fm = problem.energy(&x)?;
        x[i] = p[i];
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(Error::NonFinite("energy in difference stencil"));
        }
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

/// Central differences of the analytic gradient, symmetrized.
pub fn fd_hessian<P: Problem + ?Sized>(problem: &P, p: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = problem.dim();
    check_point(p, n)?;
    let mut x = p.to_vec();
    let mut hess = DMatrix::zeros(n, n);
    for j in 0..n {
        x[j] = p[j] + h;
        let gp = problem.gradient(&x)?;
        x[j] = p[j] - h;
        let gm = problem.gradient(&x)?;
        x[j] = p[j];
        for i in 0..n {
            hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    let sym = (&hess + hess.transpose()) * 0.5;
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("finite-difference Hessian"));
    }
    Ok(sym)
}

/// Central-difference Jacobian of the residual map.
pub fn fd_jacobian<P: Problem + ?Sized>(problem: &P, p: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = problem.dim();
    check_point(p, n)?;
    let mut x = p.to_vec();
    let m = problem.residual(p)?.len();
    let mut jac = DMatrix::zeros(m, n);
    for j in 0..n {
        x[j] = p[j] + h;
        let fp = problem.residual(&x)?;
        x[j] = p[j] - h;
        let fm = problem.residual(&x)?;
        x[j] = p[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `‖a − b‖ / (1 + ‖a‖)`.
pub fn relative_error(analytic: &[f64], approx: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(approx)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    diff / (1.0 + norm(analytic))
}

/// Relative gradient discrepancy against [`fd_gradient`].
pub fn gradient_check<P: Problem + ?Sized>(problem: &P, p: &[f64], h: f64) -> Result<f64> {
    let analytic = problem.gradient(p)?;
    let fd = fd_gradient(problem, p, h)?;
    Ok(relative_error(&analytic, &fd))
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
