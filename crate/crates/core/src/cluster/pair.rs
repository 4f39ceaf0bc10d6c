use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Isotropic pair potential between cluster atoms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PairKind {
    /// `4ε[(σ/r)¹² − (σ/r)⁶]`
    #[serde(rename = "lj")]
    LennardJones { epsilon: f64, sigma: f64 },
    /// `ε e^{ρ(1−r/rₑ)} (e^{ρ(1−r/rₑ)} − 2)`
    Morse { epsilon: f64, r_e: f64, rho: f64 },
}

impl PairKind {
    pub fn lennard_jones() -> Self {
        PairKind::LennardJones {
            epsilon: 1.0,
            sigma: 1.0,
        }
    }

    pub fn morse(rho: f64) -> Self {
        PairKind::Morse {
            epsilon: 1.0,
            r_e: 1.0,
            rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PairKind::LennardJones { epsilon, sigma } => {
                if !(epsilon > 0.0 && sigma > 0.0 && epsilon.is_finite() && sigma.is_finite()) {
                    return invalid("Lennard-Jones epsilon and sigma must be positive");
                }
            }
            PairKind::Morse { epsilon, r_e, rho } => {
                if !(epsilon > 0.0 && r_e > 0.0 && epsilon.is_finite() && r_e.is_finite()) {
                    return invalid("Morse epsilon and r_e must be positive");
                }
                if !(rho > 0.0 && rho.is_finite()) {
                    return invalid("Morse rho must be positive");
                }
            }
        }
        Ok(())
    }

    pub fn energy(&self, r: f64) -> f64 {
        match *self {
            PairKind::LennardJones { epsilon, sigma } => {
                let s6 = (sigma / r).powi(6);
                4.0 * epsilon * (s6 * s6 - s6)
            }
            PairKind::Morse { epsilon, r_e, rho } => {
                let e = (rho * (1.0 - r / r_e)).exp();
                epsilon * e * (e - 2.0)
            }
        }
    }

    /// dv/dr
    pub fn derivative(&self, r: f64) -> f64 {
        match *self {
            PairKind::LennardJones { epsilon, sigma } => {
                let s6 = (sigma / r).powi(6);
                24.0 * epsilon / r * (s6 - 2.0 * s6 * s6)
            }
            PairKind::Morse { epsilon, r_e, rho } => {
                let e = (rho * (1.0 - r / r_e)).exp();
                -2.0 * epsilon * rho / r_e * e * (e - 1.0)
            }
        }
    }

    /// d²v/dr²
    pub fn second_derivative(&self, r: f64) -> f64 {
        match *self {
            PairKind::LennardJones { epsilon, sigma } => {
                let s6 = (sigma / r).powi(6);
                4.0 * epsilon / (r * r) * (156.0 * s6 * s6 - 42.0 * s6)
            }
            PairKind::Morse { epsilon, r_e, rho } => {
                let e = (rho * (1.0 - r / r_e)).exp();
                2.0 * epsilon * rho * rho / (r_e * r_e) * e * (2.0 * e - 1.0)
            }
        }
    }

    /// Separation at the bottom of the well.
    pub fn r_min(&self) -> f64 {
        match *self {
            PairKind::LennardJones { sigma, .. } => 2f64.powf(1.0 / 6.0) * sigma,
            PairKind::Morse { r_e, .. } => r_e,
        }
    }

    pub fn well_depth(&self) -> f64 {
        match *self {
            PairKind::LennardJones { epsilon, .. } | PairKind::Morse { epsilon, .. } => epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureEval {
    /// Exact expression: `2ρ²` for Morse, `72` for Lennard-Jones.
    ClosedForm,
    /// `r_min² v″(r_min) / ε` from the analytic second derivative.
    SecondDerivative,
}

/// Dimensionless curvature `r_min² v″(r_min) / ε` at the bottom of the well.
pub fn pair_curvature(kind: PairKind, eval: CurvatureEval) -> f64 {
    match eval {
        CurvatureEval::ClosedForm => match kind {
            // v″(2^{1/6}σ) = 144·2^{−4/3} ε/σ², times r_min² = 2^{1/3}σ².
            PairKind::LennardJones { .. } => 72.0,
            PairKind::Morse { rho, .. } => 2.0 * rho * rho,
        },
        CurvatureEval::SecondDerivative => {
            let r = kind.r_min();
            r * r * kind.second_derivative(r) / kind.well_depth()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_bottoms() {
        let lj = PairKind::lennard_jones();
        assert!((lj.energy(lj.r_min()) + 1.0).abs() < 1e-14);
        assert!(lj.derivative(lj.r_min()).abs() < 1e-13);
        assert_eq!(lj.energy(1.0), 0.0);
        let morse = PairKind::morse(6.0);
        assert_eq!(morse.energy(1.0), -1.0);
        assert_eq!(morse.derivative(1.0), 0.0);
    }

    #[test]
    fn curvature_matches_at_rho_six() {
        let lj = pair_curvature(PairKind::lennard_jones(), CurvatureEval::ClosedForm);
        let m6 = pair_curvature(PairKind::morse(6.0), CurvatureEval::ClosedForm);
        assert_eq!(lj, 72.0);
        assert_eq!(m6, 72.0);
        assert_eq!(pair_curvature(PairKind::morse(3.0), CurvatureEval::ClosedForm), 18.0);
        for k in [PairKind::lennard_jones(), PairKind::morse(6.0), PairKind::morse(3.0)] {
            let a = pair_curvature(k, CurvatureEval::ClosedForm);
            let b = pair_curvature(k, CurvatureEval::SecondDerivative);
            assert!((a - b).abs() < 1e-12 * a, "{k:?}: {a} vs {b}");
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-5;
        for k in [
            PairKind::lennard_jones(),
            PairKind::LennardJones { epsilon: 2.0, sigma: 0.8 },
            PairKind::morse(6.0),
            PairKind::Morse { epsilon: 0.5, r_e: 1.3, rho: 3.0 },
        ] {
            for r in [0.9, 1.1, 1.5, 2.3] {
                let d1 = (k.energy(r + h) - k.energy(r - h)) / (2.0 * h);
                let d2 = (k.derivative(r + h) - k.derivative(r - h)) / (2.0 * h);
                assert!((d1 - k.derivative(r)).abs() < 1e-6 * (1.0 + d1.abs()));
                assert!((d2 - k.second_derivative(r)).abs() < 1e-5 * (1.0 + d2.abs()));
            }
        }
    }

    #[test]
    fn validation() {
        assert!(PairKind::morse(0.0).validate().is_err());
        assert!(PairKind::LennardJones { epsilon: -1.0, sigma: 1.0 }.validate().is_err());
        assert!(PairKind::morse(6.0).validate().is_ok());
    }
}
