//! Stationary-point classification and deduplicated solution sets.

use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_point, invalid, Error, Result};
use crate::problem::{Metric, Problem, ProblemInstance};
use crate::validate::{fd_hessian, norm};

/// Threshold under which a Hessian eigenvalue counts as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroTol {
    Absolute(f64),
    /// `tol · (1 + max|λ|)`.
    Relative(f64),
}

impl ZeroTol {
    fn resolve(self, eigenvalues: &[f64]) -> f64 {
        match self {
            ZeroTol::Absolute(t) => t,
            ZeroTol::Relative(t) => {
                let scale = eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
                t * (1.0 + scale)
            }
        }
    }

    fn value(self) -> f64 {
        match self {
            ZeroTol::Absolute(t) | ZeroTol::Relative(t) => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HessianMode {
    /// Use the family's own Hessian (analytic where the family provides one).
    Analytic,
    /// Central differences of the analytic gradient with `fd_step`.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub zero_tol: ZeroTol,
    pub hessian_mode: HessianMode,
    pub fd_step: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            zero_tol: ZeroTol::Relative(1e-6),
            hessian_mode: HessianMode::Analytic,
            fd_step: 1e-5,
        }
    }
}

impl ClassifyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.zero_tol.value() > 0.0) || !(self.fd_step > 0.0) {
            return invalid("zero_tol and fd_step must be positive");
        }
        Ok(())
    }
}

/// Which procedure produced a stationary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Newton,
    GradSq,
    NewtonHomotopy,
    Enumeration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub solver: Origin,
    pub seed: u64,
    pub start_id: u64,
}

impl Provenance {
    pub fn new(solver: Origin, seed: u64, start_id: u64) -> Self {
        Provenance {
            solver,
            seed,
            start_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub label: String,
    pub coords: Vec<f64>,
    pub energy: f64,
    pub residual_norm: f64,
    /// Number of negative Hessian eigenvalues.
    pub index: usize,
    pub zero_eigs: usize,
    pub singular: bool,
    pub provenance: Provenance,
}

/// Counts negative and zero eigenvalues of the symmetrized Hessian.
pub fn hessian_signature(hessian: &DMatrix<f64>, zero_tol: ZeroTol) -> Result<(usize, usize)> {
    if hessian.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Hessian"));
    }
    if hessian.nrows() == 0 {
        return Ok((0, 0));
    }
    let sym = (hessian + hessian.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let eig = eig.as_slice();
    let tol = zero_tol.resolve(eig);
    let index = eig.iter().filter(|&&l| l < -tol).count();
    let zero = eig.iter().filter(|&&l| l.abs() <= tol).count();
    Ok((index, zero))
}

/// Annotates `p` with energy, residual norm, Hessian index and singularity.
///
/// Convergence is recorded, not enforced: the caller is responsible for
/// checking the residual against its acceptance tolerance.
pub fn classify(
    instance: &ProblemInstance,
    p: &[f64],
    cfg: &ClassifyConfig,
    provenance: Provenance,
) -> Result<StationaryPoint> {
    let mut sp = classify_point(instance, p, cfg, provenance)?;
    sp.label = instance.label.clone();
    Ok(sp)
}

/// [`classify`] for any [`Problem`]; the label is left empty.
pub fn classify_point<P: Problem + ?Sized>(
    problem: &P,
    p: &[f64],
    cfg: &ClassifyConfig,
    provenance: Provenance,
) -> Result<StationaryPoint> {
    cfg.validate()?;
    check_point(p, problem.dim())?;
    let hessian = match cfg.hessian_mode {
        HessianMode::Analytic => problem.hessian(p)?,
        HessianMode::FiniteDifference => fd_hessian(problem, p, cfg.fd_step)?,
    };
    let (index, zero_eigs) = hessian_signature(&hessian, cfg.zero_tol)?;
    let energy = problem.energy(p)?;
    let residual_norm = norm(&problem.residual(p)?);
    Ok(StationaryPoint {
        label: String::new(),
        coords: p.to_vec(),
        energy,
        residual_norm,
        index,
        zero_eigs,
        singular: zero_eigs > 0,
        provenance,
    })
}

/// Canonical order: ascending energy, then lexicographic coordinates.
pub fn canonical_cmp(a: &StationaryPoint, b: &StationaryPoint) -> Ordering {
    a.energy.total_cmp(&b.energy).then_with(|| {
        a.coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| a.coords.len().cmp(&b.coords.len()))
    })
}

/// Deduplicated, canonically ordered stationary points of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub instance_label: String,
    pub tolerance: f64,
    pub metric: Metric,
    pub points: Vec<StationaryPoint>,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points per Hessian index, for indices `0..=n`.
    pub fn index_histogram(&self, n: usize) -> Vec<usize> {
        let top = self.points.iter().map(|p| p.index).max().unwrap_or(0).max(n);
        let mut hist = vec![0; top + 1];
        for p in &self.points {
            hist[p.index] += 1;
        }
        hist
    }

    /// Whether some stored point lies within `tol` of `coords`.
    pub fn contains(&self, coords: &[f64], tol: f64) -> bool {
        self.points
            .iter()
            .any(|p| self.metric.distance(&p.coords, coords) < tol)
    }

    pub fn singular_count(&self) -> usize {
        self.points.iter().filter(|p| p.singular).count()
    }
}

/// Greedy clustering of `points` in canonical order: a point is kept only if
/// it lies at least `tol` away from every point kept before it.
pub fn dedup(
    label: &str,
    points: impl IntoIterator<Item = StationaryPoint>,
    tol: f64,
    metric: Metric,
) -> Result<SolutionSet> {
    if !(tol > 0.0) {
        return invalid(format!("dedup tolerance must be positive, got {tol}"));
    }
    let mut all: Vec<StationaryPoint> = points.into_iter().collect();
    if let Some(p) = all.iter().find(|p| p.label != label) {
        return Err(Error::MixedLabels(label.to_string(), p.label.clone()));
    }
    all.sort_by(canonical_cmp);
    let mut kept: Vec<StationaryPoint> = Vec::new();
    for p in all {
        if kept
            .iter()
            .all(|q| metric.distance(&q.coords, &p.coords) >= tol)
        {
            kept.push(p);
        }
    }
    Ok(SolutionSet {
        instance_label: label.to_string(),
        tolerance: tol,
        metric,
        points: kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sp(coords: Vec<f64>, energy: f64) -> StationaryPoint {
        StationaryPoint {
            label: "t".into(),
            coords,
            energy,
            residual_norm: 0.0,
            index: 0,
            zero_eigs: 0,
            singular: false,
            provenance: Provenance::new(Origin::Newton, 0, 0),
        }
    }

    #[test]
    fn duplicate_points_collapse() {
        let s = dedup("t", vec![sp(vec![1.0, 2.0], 0.5); 2], 1e-6, Metric::Euclidean).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn angular_dedup_wraps() {
        let a = sp(vec![0.1, 0.2], 0.0);
        let b = sp(vec![0.1 + 2.0 * PI, 0.2 - 2.0 * PI], 0.0);
        let s = dedup("t", vec![a.clone(), b.clone()], 1e-6, Metric::AngularMod2Pi).unwrap();
        assert_eq!(s.len(), 1);
        let s = dedup("t", vec![a, b], 1e-6, Metric::Euclidean).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn mixed_labels_rejected() {
        let mut b = sp(vec![0.0], 0.0);
        b.label = "other".into();
        let err = dedup("t", vec![sp(vec![1.0], 0.0), b], 1e-6, Metric::Euclidean).unwrap_err();
        assert!(matches!(err, Error::MixedLabels(..)));
    }

    #[test]
    fn nonpositive_tolerance_rejected() {
        assert!(dedup("t", Vec::new(), 0.0, Metric::Euclidean).is_err());
    }

    #[test]
    fn signature_counts() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-2.0, 0.0, 3.0, -1e-9]));
        let (idx, zero) = hessian_signature(&h, ZeroTol::Relative(1e-6)).unwrap();
        assert_eq!((idx, zero), (1, 2));
        let mut bad = h.clone();
        bad[(0, 1)] = f64::NAN;
        assert!(hessian_signature(&bad, ZeroTol::Absolute(1e-6)).is_err());
    }

    #[test]
    fn signature_invariant_under_transpose() {
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.5, -3.0, 1.0, 0.0, 1.2, 0.2]);
        let a = hessian_signature(&h, ZeroTol::Relative(1e-6)).unwrap();
        let b = hessian_signature(&h.transpose(), ZeroTol::Relative(1e-6)).unwrap();
        assert_eq!(a, b);
    }

    fn arb_points() -> impl Strategy<Value = Vec<StationaryPoint>> {
        prop::collection::vec(
            (prop::collection::vec(-2i32..=2, 2), -2i32..=2),
            0..30,
        )
        .prop_map(|v| {
            v.into_iter()
                .map(|(c, e)| sp(c.into_iter().map(|x| x as f64 * 0.5).collect(), e as f64))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn dedup_idempotent_and_order_free(points in arb_points(), seed in any::<u64>()) {
            let once = dedup("t", points.clone(), 0.6, Metric::Euclidean).unwrap();
            let twice = dedup("t", once.points.clone(), 0.6, Metric::Euclidean).unwrap();
            prop_assert_eq!(&once, &twice);

            let mut shuffled = points;
            let n = shuffled.len();
            if n > 1 {
                let mut s = seed;
                for i in (1..n).rev() {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    shuffled.swap(i, (s >> 33) as usize % (i + 1));
                }
            }
            let again = dedup("t", shuffled, 0.6, Metric::Euclidean).unwrap();
            prop_assert_eq!(once, again);
        }

        #[test]
        fn signature_invariant_under_eigenvalue_permutation(
            eig in prop::collection::vec(-5.0f64..5.0, 1..6),
            rot in 0.0f64..std::f64::consts::TAU,
        ) {
            let n = eig.len();
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig.clone()));
            let mut rev = eig.clone();
            rev.reverse();
            let d2 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(rev));
            // rotate in the (0, n-1) plane
            let mut q = DMatrix::<f64>::identity(n, n);
            if n > 1 {
                q[(0, 0)] = rot.cos();
                q[(0, n - 1)] = -rot.sin();
                q[(n - 1, 0)] = rot.sin();
                q[(n - 1, n - 1)] = rot.cos();
            }
            let h = &q * &d * q.transpose();
            let a = hessian_signature(&d, ZeroTol::Absolute(1e-9)).unwrap();
            let b = hessian_signature(&d2, ZeroTol::Absolute(1e-9)).unwrap();
            let c = hessian_signature(&h, ZeroTol::Absolute(1e-9)).unwrap();
            prop_assert_eq!(a, b);
            prop_assert_eq!(a, c);
        }
    }
}
