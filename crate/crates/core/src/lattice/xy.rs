use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_point, invalid, Error, Result};
use crate::problem::{Metric, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    /// Couplings on wrap-around bonds change sign.
    AntiPeriodic,
}

/// Distribution of the quenched bond couplings `J_{k,l}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Disorder {
    Constant(f64),
    /// ±1 with equal probability.
    UniformSigned,
    Uniform(f64, f64),
}

impl Disorder {
    fn sample(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Disorder::Constant(c) => c,
            Disorder::UniformSigned => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
            Disorder::Uniform(a, b) => rng.random_range(a..=b),
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Disorder::Constant(c) if !c.is_finite() => invalid("constant coupling must be finite"),
            Disorder::Uniform(a, b) if !(a.is_finite() && b.is_finite() && a <= b) => {
                invalid(format!("uniform disorder needs finite a <= b, got ({a}, {b})"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bond {
    a: usize,
    b: usize,
    wraps: bool,
}

/// XY model `H = ½ Σ_k Σ_{l∈N(k)} [1 − J_{kl} cos(θ_k − θ_l)]` on an
/// `L^d` lattice.
///
/// Bonds are enumerated as `(site, site + e_axis)` for every site (row-major,
/// last axis fastest) and axis, so each unordered neighbour pair is visited
/// once and the prefactor ½ is absorbed. With periodic boundaries and gauge
/// fixing, site 0 is pinned to θ = 0 and dropped from the variable vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "XyParams")]
pub struct XyModel {
    d: usize,
    #[serde(rename = "L")]
    side: usize,
    bc: Boundary,
    disorder: Disorder,
    seed: u64,
    gauge_fixed: bool,
    couplings: Vec<f64>,
    #[serde(skip)]
    bonds: Vec<Bond>,
}

#[derive(Deserialize)]
struct XyParams {
    d: usize,
    #[serde(rename = "L")]
    side: usize,
    bc: Boundary,
    disorder: Disorder,
    seed: u64,
    gauge_fixed: bool,
    couplings: Vec<f64>,
}

impl TryFrom<XyParams> for XyModel {
    type Error = Error;
    fn try_from(p: XyParams) -> Result<Self> {
        XyModel::with_couplings(p.d, p.side, p.bc, p.disorder, p.seed, p.gauge_fixed, p.couplings)
    }
}

impl XyModel {
    /// Draws one coupling per bond from `disorder`, seeded by `seed`.
    pub fn new(
        d: usize,
        side: usize,
        bc: Boundary,
        disorder: Disorder,
        seed: u64,
        gauge_fixed: bool,
    ) -> Result<Self> {
        check_shape(d, side)?;
        disorder.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let couplings = (0..d * side.pow(d as u32))
            .map(|_| disorder.sample(&mut rng))
            .collect();
        Self::with_couplings(d, side, bc, disorder, seed, gauge_fixed, couplings)
    }

    pub fn with_couplings(
        d: usize,
        side: usize,
        bc: Boundary,
        disorder: Disorder,
        seed: u64,
        gauge_fixed: bool,
        couplings: Vec<f64>,
    ) -> Result<Self> {
        check_shape(d, side)?;
        let sites = side.pow(d as u32);
        if couplings.len() != d * sites {
            return Err(Error::DimensionMismatch {
                expected: d * sites,
                got: couplings.len(),
            });
        }
        if couplings.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("couplings"));
        }
        let mut bonds = Vec::with_capacity(d * sites);
        for site in 0..sites {
            for axis in 0..d {
                let stride = side.pow((d - 1 - axis) as u32);
                let coord = (site / stride) % side;
                let (b, wraps) = if coord + 1 == side {
                    (site - coord * stride, true)
                } else {
                    (site + stride, false)
                };
                bonds.push(Bond { a: site, b, wraps });
            }
        }
        Ok(XyModel {
            d,
            side,
            bc,
            disorder,
            seed,
            // Anti-periodic lattices keep every angle free.
            gauge_fixed: gauge_fixed && bc == Boundary::Periodic,
            couplings,
            bonds,
        })
    }

    pub fn sites(&self) -> usize {
        self.side.pow(self.d as u32)
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn gauge_fixed(&self) -> bool {
        self.gauge_fixed
    }

    pub fn boundary(&self) -> Boundary {
        self.bc
    }

    pub fn default_label(&self) -> String {
        let bc = match self.bc {
            Boundary::Periodic => "p",
            Boundary::AntiPeriodic => "ap",
        };
        format!(
            "xy-d{}-L{}-{}{}-s{}",
            self.d,
            self.side,
            bc,
            if self.gauge_fixed { "-g" } else { "" },
            self.seed
        )
    }

    fn effective_coupling(&self, bond: usize) -> f64 {
        let j = self.couplings[bond];
        if self.bc == Boundary::AntiPeriodic && self.bonds[bond].wraps {
            -j
        } else {
            j
        }
    }

    fn offset(&self) -> usize {
        usize::from(self.gauge_fixed)
    }

    /// All site angles, with the pinned site restored.
    pub fn full_angles(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(x, self.dim())?;
        let mut theta = Vec::with_capacity(self.sites());
        if self.gauge_fixed {
            theta.push(0.0);
        }
        theta.extend_from_slice(x);
        Ok(theta)
    }
}

fn check_shape(d: usize, side: usize) -> Result<()> {
    if !(1..=3).contains(&d) {
        return invalid(format!("xy lattice dimension must be 1, 2 or 3, got {d}"));
    }
    if side < 2 {
        return invalid(format!("xy lattice side must be at least 2, got {side}"));
    }
    Ok(())
}

impl Problem for XyModel {
    fn dim(&self) -> usize {
        self.sites() - self.offset()
    }

    fn energy(&self, x: &[f64]) -> Result<f64> {
        let t = self.full_angles(x)?;
        Ok(self
            .bonds
            .iter()
            .enumerate()
            .map(|(e, bd)| 1.0 - self.effective_coupling(e) * (t[bd.a] - t[bd.b]).cos())
            .sum())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let t = self.full_angles(x)?;
        let mut g = vec![0.0; t.len()];
        for (e, bd) in self.bonds.iter().enumerate() {
            let s = self.effective_coupling(e) * (t[bd.a] - t[bd.b]).sin();
            g[bd.a] += s;
            g[bd.b] -= s;
        }
        Ok(g.split_off(self.offset()))
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let t = self.full_angles(x)?;
        let n = t.len();
        let mut h = DMatrix::zeros(n, n);
        for (e, bd) in self.bonds.iter().enumerate() {
            let c = self.effective_coupling(e) * (t[bd.a] - t[bd.b]).cos();
            h[(bd.a, bd.a)] += c;
            h[(bd.b, bd.b)] += c;
            h[(bd.a, bd.b)] -= c;
            h[(bd.b, bd.a)] -= c;
        }
        let k = self.offset();
        Ok(h.view((k, k), (n - k, n - k)).into_owned())
    }

    fn has_analytic_hessian(&self) -> bool {
        true
    }

    fn metric(&self) -> Metric {
        Metric::AngularMod2Pi
    }

    fn sample_start(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..self.dim())
            .map(|_| PI - rng.random_range(0.0..TAU))
            .collect()
    }

    fn grid_axis(&self, k: usize) -> Vec<f64> {
        (0..k).map(|i| -PI + TAU * i as f64 / k as f64).collect()
    }
}
