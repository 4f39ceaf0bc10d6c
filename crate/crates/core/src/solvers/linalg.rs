use nalgebra::{DMatrix, DVector};

/// Steps through a Jacobian whose pivot ratio exceeds this are refused.
pub const MAX_CONDITION: f64 = 1e12;

pub(crate) enum Direction {
    Solved(Vec<f64>),
    Singular,
}

/// Solves `J·d = −f` by LU with partial pivoting.
///
/// The ratio of largest to smallest pivot magnitude serves as the condition
/// estimate; it is invariant under scaling of `J`.
pub(crate) fn newton_direction(j: &DMatrix<f64>, f: &[f64]) -> Direction {
    let n = f.len();
    if j.nrows() != n || j.ncols() != n || j.iter().any(|v| !v.is_finite()) {
        return Direction::Singular;
    }
    if n == 0 {
        return Direction::Solved(Vec::new());
    }
    let lu = j.clone().lu();
    let u = lu.u();
    let (mut hi, mut lo) = (0.0_f64, f64::INFINITY);
    for i in 0..n {
        let d = u[(i, i)].abs();
        hi = hi.max(d);
        lo = lo.min(d);
    }
    if !(lo > 0.0 && hi / lo <= MAX_CONDITION) {
        return Direction::Singular;
    }
    let rhs = DVector::from_iterator(n, f.iter().map(|v| -v));
    match lu.solve(&rhs) {
        Some(d) if d.iter().all(|v| v.is_finite()) => Direction::Solved(d.as_slice().to_vec()),
        _ => Direction::Singular,
    }
}

pub(crate) fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}
