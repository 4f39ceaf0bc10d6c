use nalgebra::DMatrix;
use num_bigint::BigUint;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{check_point, invalid, Error, Result};
use crate::problem::{linspace, Problem};
use crate::stationary::{classify_point, dedup, ClassifyConfig, Origin, Provenance, SolutionSet};

/// Largest number of configurations [`Phi4::enumerate_decoupled`] will visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 19_683; // 3^9

/// Nearest-neighbour φ⁴ model on an `N×N` periodic square lattice.
///
/// Sites are stored row-major; every site has the multiset of its four
/// wrapped neighbours, so for `N = 2` neighbours repeat and for `N = 1` all
/// four neighbours are the site itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Phi4Params")]
pub struct Phi4 {
    #[serde(rename = "N")]
    side: usize,
    lambda: f64,
    mu2: f64,
    #[serde(rename = "J")]
    coupling: f64,
}

#[derive(Deserialize)]
struct Phi4Params {
    #[serde(rename = "N")]
    side: usize,
    lambda: f64,
    mu2: f64,
    #[serde(rename = "J")]
    coupling: f64,
}

impl TryFrom<Phi4Params> for Phi4 {
    type Error = Error;
    fn try_from(p: Phi4Params) -> Result<Self> {
        Phi4::new(p.side, p.lambda, p.mu2, p.coupling)
    }
}

impl Phi4 {
    pub const DEFAULT_LAMBDA: f64 = 0.6;
    pub const DEFAULT_MU2: f64 = 2.0;

    pub fn new(side: usize, lambda: f64, mu2: f64, coupling: f64) -> Result<Self> {
        if side == 0 {
            return invalid("phi4 lattice side N must be at least 1");
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("phi4 lambda must be positive, got {lambda}"));
        }
        if !(mu2.is_finite() && coupling.is_finite()) {
            return invalid("phi4 mu2 and J must be finite");
        }
        Ok(Phi4 {
            side,
            lambda,
            mu2,
            coupling,
        })
    }

    /// `λ = 3/5`, `μ² = 2`.
    pub fn with_defaults(side: usize, coupling: f64) -> Result<Self> {
        Self::new(side, Self::DEFAULT_LAMBDA, Self::DEFAULT_MU2, coupling)
    }

    pub fn side(&self) -> usize {
        self.side
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn mu2(&self) -> f64 {
        self.mu2
    }
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn default_label(&self) -> String {
        format!("phi4-N{}-J{}", self.side, self.coupling)
    }

    fn neighbours(&self, site: usize) -> [usize; 4] {
        let n = self.side;
        let (i, j) = (site / n, site % n);
        [
            ((i + 1) % n) * n + j,
            ((i + n - 1) % n) * n + j,
            i * n + (j + 1) % n,
            i * n + (j + n - 1) % n,
        ]
    }

    /// Nonzero uniform root `√(6μ²/λ)` of the single-site cubic, if real.
    pub fn uniform_root(&self) -> Option<f64> {
        let r2 = 6.0 * self.mu2 / self.lambda;
        (r2 > 0.0).then(|| r2.sqrt())
    }

    /// Total degree of the stationary equations, `3^{N²}`.
    pub fn bezout(&self) -> BigUint {
        BigUint::from(3u32).pow((self.side * self.side) as u32)
    }

    /// All real stationary points of the decoupled (`J = 0`) model: every
    /// site independently sits at one root of `λx³/6 − μ²x = 0`.
    pub fn enumerate_decoupled(
        &self,
        label: &str,
        cap: u128,
        cfg: &ClassifyConfig,
    ) -> Result<SolutionSet> {
        if self.coupling != 0.0 {
            return invalid("decoupled enumeration requires J = 0");
        }
        let roots: Vec<f64> = match self.uniform_root() {
            Some(r) => vec![-r, 0.0, r],
            None => vec![0.0],
        };
        let n = self.dim();
        let count = (roots.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if count > cap {
            return Err(Error::CapExceeded { count, cap });
        }
        let mut points = Vec::with_capacity(count as usize);
        let mut digits = vec![0usize; n];
        for id in 0..count {
            let x: Vec<f64> = digits.iter().map(|&d| roots[d]).collect();
            let mut sp = classify_point(self, &x, cfg, Provenance::new(Origin::Enumeration, 0, id as u64))?;
            sp.label = label.to_string();
            points.push(sp);
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < roots.len() {
                    break;
                }
                *d = 0;
            }
        }
        let min_gap = roots
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let tol = if min_gap.is_finite() { (1e-6f64).min(min_gap / 2.0) } else { 1e-6 };
        dedup(label, points, tol, crate::problem::Metric::Euclidean)
    }
}

impl Problem for Phi4 {
    fn dim(&self) -> usize {
        self.side * self.side
    }

    fn energy(&self, x: &[f64]) -> Result<f64> {
        check_point(x, self.dim())?;
        let quarter_j = self.coupling / 4.0;
        let e = x
            .iter()
            .enumerate()
            .map(|(s, &xs)| {
                let local = self.lambda / 24.0 * xs.powi(4) - self.mu2 / 2.0 * xs * xs;
                let bond: f64 = self.neighbours(s).iter().map(|&t| (xs - x[t]).powi(2)).sum();
                local + quarter_j * bond
            })
            .sum();
        Ok(e)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(x, self.dim())?;
        let j = self.coupling;
        Ok(x.iter()
            .enumerate()
            .map(|(s, &xs)| {
                let nb: f64 = self.neighbours(s).iter().map(|&t| x[t]).sum();
                self.lambda / 6.0 * xs.powi(3) + (4.0 * j - self.mu2) * xs - j * nb
            })
            .collect())
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        check_point(x, n)?;
        let j = self.coupling;
        let mut h = DMatrix::zeros(n, n);
        for (s, &xs) in x.iter().enumerate() {
            h[(s, s)] += self.lambda / 2.0 * xs * xs + 4.0 * j - self.mu2;
            for t in self.neighbours(s) {
                h[(s, t)] -= j;
            }
        }
        Ok(h)
    }

    fn has_analytic_hessian(&self) -> bool {
        true
    }

    fn sample_start(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..self.dim()).map(|_| rng.random_range(-6.0..=6.0)).collect()
    }

    fn grid_axis(&self, k: usize) -> Vec<f64> {
        linspace(-5.0, 5.0, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::{fd_gradient, relative_error};
    use proptest::prelude::*;

    #[test]
    fn construction() {
        assert_eq!(Phi4::new(3, 0.6, 2.0, 0.1).unwrap().dim(), 9);
        assert!(Phi4::new(0, 0.6, 2.0, 0.1).is_err());
        assert!(Phi4::new(2, 0.0, 2.0, 0.1).is_err());
        let d = Phi4::with_defaults(2, 0.0).unwrap();
        assert_eq!((d.lambda(), d.mu2()), (0.6, 2.0));
    }

    #[test]
    fn bezout_counts() {
        let b = |n| Phi4::with_defaults(n, 0.0).unwrap().bezout();
        assert_eq!(b(2), BigUint::from(81u32));
        assert_eq!(b(3), BigUint::from(19683u32));
        assert!(b(6) > BigUint::from(10u32).pow(17));
        assert!(b(7) > BigUint::from(10u32).pow(23));
    }

    #[test]
    fn zero_configuration_is_stationary() {
        for j in [0.0, 0.3, 1.0] {
            let m = Phi4::with_defaults(3, j).unwrap();
            let x = vec![0.0; 9];
            assert_eq!(m.energy(&x).unwrap(), 0.0);
            assert!(m.gradient(&x).unwrap().iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn single_site_energy() {
        let m = Phi4::with_defaults(1, 0.0).unwrap();
        let e = m.energy(&[20f64.sqrt()]).unwrap();
        assert!((e + 10.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_root_cancels_coupling() {
        for j in [0.1, 0.5, 1.0] {
            let m = Phi4::with_defaults(3, j).unwrap();
            let r = m.uniform_root().unwrap();
            assert!((r - 20f64.sqrt()).abs() < 1e-14);
            for s in [r, -r] {
                let g = m.gradient(&[s; 9]).unwrap();
                assert!(g.iter().all(|v| v.abs() < 1e-12), "{g:?}");
            }
        }
    }

    #[test]
    fn gradient_at_ones() {
        let m = Phi4::with_defaults(2, 0.0).unwrap();
        let g = m.gradient(&[1.0; 4]).unwrap();
        for v in &g {
            assert!((v + 1.9).abs() < 1e-14);
        }
        let fd = fd_gradient(&m, &[1.0; 4], 1e-5).unwrap();
        for (a, b) in g.iter().zip(&fd) {
            assert!(((a - b) / a).abs() < 1e-6);
        }
    }

    #[test]
    fn small_lattices_have_consistent_multiplicity() {
        // N = 1 and N = 2 wrap onto repeated neighbours; the Hessian must
        // still be the derivative of the gradient.
        for n in [1, 2, 3] {
            let m = Phi4::with_defaults(n, 0.7).unwrap();
            let x: Vec<f64> = (0..n * n).map(|i| 0.3 * i as f64 - 0.5).collect();
            let h = m.hessian(&x).unwrap();
            let fd = crate::validate::fd_hessian(&m, &x, 1e-5).unwrap();
            assert!((&h - &fd).amax() < 1e-6);
            assert!((&h - h.transpose()).amax() == 0.0);
            assert!(relative_error(&m.gradient(&x).unwrap(), &fd_gradient(&m, &x, 1e-5).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn decoupled_enumeration() {
        let cfg = ClassifyConfig::default();
        let m = Phi4::with_defaults(2, 0.0).unwrap();
        let set = m.enumerate_decoupled("phi4", DEFAULT_ENUMERATION_CAP, &cfg).unwrap();
        assert_eq!(set.len(), 81);
        assert_eq!(set.index_histogram(4), vec![16, 32, 24, 8, 1]);

        let one = Phi4::with_defaults(1, 0.0).unwrap();
        let set = one.enumerate_decoupled("phi4", DEFAULT_ENUMERATION_CAP, &cfg).unwrap();
        let mut xs: Vec<f64> = set.points.iter().map(|p| p.coords[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs.len(), 3);
        assert!((xs[2] - 20f64.sqrt()).abs() < 1e-14 && xs[1] == 0.0);

        assert!(Phi4::with_defaults(2, 0.1)
            .unwrap()
            .enumerate_decoupled("x", DEFAULT_ENUMERATION_CAP, &cfg)
            .is_err());
        assert!(matches!(
            Phi4::with_defaults(4, 0.0)
                .unwrap()
                .enumerate_decoupled("x", DEFAULT_ENUMERATION_CAP, &cfg),
            Err(Error::CapExceeded { .. })
        ));
    }

    proptest! {
        #[test]
        fn gradient_odd_energy_even(x in prop::collection::vec(-5.0f64..5.0, 9), j in -1.0f64..1.0) {
            let m = Phi4::with_defaults(3, j).unwrap();
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let g = m.gradient(&x).unwrap();
            let gn = m.gradient(&neg).unwrap();
            for (a, b) in g.iter().zip(&gn) {
                prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
            let (e, en) = (m.energy(&x).unwrap(), m.energy(&neg).unwrap());
            prop_assert!((e - en).abs() <= 1e-12 * (1.0 + e.abs()));
        }
    }
}
