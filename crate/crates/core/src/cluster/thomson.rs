use std::f64::consts::PI;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{distance, MIN_SEPARATION};
use crate::error::{check_point, invalid, Error, Result};
use crate::problem::{linspace, Problem};

/// `N` unit charges on the unit sphere with Coulomb energy `Σ 1/rᵢⱼ`.
///
/// Electron 0 is fixed at the north pole, electron 1 lies in the xz-plane
/// (one free polar angle), and the remaining electrons carry
/// `(polar, azimuth)` pairs: `2N − 3` free angles, ordered
/// `θ₁, θ₂, φ₂, θ₃, φ₃, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ThomsonParams")]
pub struct Thomson {
    electrons: usize,
}

#[derive(Deserialize)]
struct ThomsonParams {
    electrons: usize,
}

impl TryFrom<ThomsonParams> for Thomson {
    type Error = Error;
    fn try_from(p: ThomsonParams) -> Result<Self> {
        Thomson::new(p.electrons)
    }
}

impl Thomson {
    pub fn new(electrons: usize) -> Result<Self> {
        if electrons < 2 {
            return invalid(format!("Thomson needs at least 2 electrons, got {electrons}"));
        }
        Ok(Thomson { electrons })
    }

    pub fn electrons(&self) -> usize {
        self.electrons
    }

    pub fn default_label(&self) -> String {
        format!("thomson-N{}", self.electrons)
    }

    fn angles(&self, x: &[f64], k: usize) -> (f64, f64) {
        match k {
            0 => (0.0, 0.0),
            1 => (x[0], 0.0),
            _ => (x[2 * k - 3], x[2 * k - 2]),
        }
    }

    /// Cartesian positions on the unit sphere.
    pub fn embed(&self, x: &[f64]) -> Result<Vec<[f64; 3]>> {
        check_point(x, self.dim())?;
        Ok((0..self.electrons)
            .map(|k| {
                let (t, p) = self.angles(x, k);
                [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
            })
            .collect())
    }
}

impl Problem for Thomson {
    fn dim(&self) -> usize {
        2 * self.electrons - 3
    }

    fn energy(&self, x: &[f64]) -> Result<f64> {
        let pos = self.embed(x)?;
        let mut e = 0.0;
        for i in 0..pos.len() {
            for j in i + 1..pos.len() {
                let r = distance(&pos[i], &pos[j]);
                if r < MIN_SEPARATION {
                    return Err(Error::Coincident { i, j, r });
                }
                e += 1.0 / r;
            }
        }
        Ok(e)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let pos = self.embed(x)?;
        let n = pos.len();
        let mut cart = vec![[0.0; 3]; n];
        for i in 0..n {
            for j in i + 1..n {
                let r = distance(&pos[i], &pos[j]);
                if r < MIN_SEPARATION {
                    return Err(Error::Coincident { i, j, r });
                }
                let w = -1.0 / (r * r * r);
                for c in 0..3 {
                    let d = w * (pos[i][c] - pos[j][c]);
                    cart[i][c] += d;
                    cart[j][c] -= d;
                }
            }
        }
        let dot = |a: &[f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let mut g = Vec::with_capacity(self.dim());
        for (k, gk) in cart.iter().enumerate().skip(1) {
            let (t, p) = self.angles(x, k);
            let (st, ct, sp, cp) = (t.sin(), t.cos(), p.sin(), p.cos());
            g.push(dot(gk, [ct * cp, ct * sp, -st]));
            if k >= 2 {
                g.push(dot(gk, [-st * sp, st * cp, 0.0]));
            }
        }
        Ok(g)
    }

    /// Polar angles in `[0.1, π − 0.1]`, azimuths in `(−π, π]`, with every
    /// pair at least 0.5 apart when the sphere has room for it.
    fn sample_start(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let mut x = Vec::new();
        for _ in 0..1000 {
            x = (0..self.dim())
                .map(|i| {
                    if i == 0 || i % 2 == 1 {
                        rng.random_range(0.1..=PI - 0.1)
                    } else {
                        PI - rng.random_range(0.0..2.0 * PI)
                    }
                })
                .collect();
            let pos = self.embed(&x).expect("sampled point has the right length");
            let spread = (0..pos.len())
                .all(|i| (i + 1..pos.len()).all(|j| distance(&pos[i], &pos[j]) >= 0.5));
            if spread {
                break;
            }
        }
        x
    }

    fn grid_axis(&self, k: usize) -> Vec<f64> {
        linspace(0.1, PI - 0.1, k)
    }
}
