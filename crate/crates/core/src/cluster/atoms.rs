use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{distance, PairKind, MIN_SEPARATION};
use crate::error::{check_point, invalid, Error, Result};
use crate::problem::{linspace, Problem};

/// A cluster of `N` atoms interacting through a pair potential.
///
/// Atom 0 sits at the origin, atom 1 on the x-axis (its signed x coordinate
/// is free), atom 2 in the xy-plane, and atoms 3.. are unconstrained. That
/// leaves `3N − 6` free coordinates for `N ≥ 3` and one (the bond length)
/// for the dimer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClusterParams")]
pub struct Cluster {
    atoms: usize,
    potential: PairKind,
}

#[derive(Deserialize)]
struct ClusterParams {
    atoms: usize,
    potential: PairKind,
}

impl TryFrom<ClusterParams> for Cluster {
    type Error = Error;
    fn try_from(p: ClusterParams) -> Result<Self> {
        Cluster::new(p.atoms, p.potential)
    }
}

impl Cluster {
    pub fn new(atoms: usize, potential: PairKind) -> Result<Self> {
        if atoms < 2 {
            return invalid(format!("a cluster needs at least 2 atoms, got {atoms}"));
        }
        potential.validate()?;
        Ok(Cluster { atoms, potential })
    }

    pub fn lennard_jones(atoms: usize) -> Result<Self> {
        Self::new(atoms, PairKind::lennard_jones())
    }

    pub fn morse(atoms: usize, rho: f64) -> Result<Self> {
        Self::new(atoms, PairKind::morse(rho))
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn kind(&self) -> PairKind {
        self.potential
    }

    pub fn default_label(&self) -> String {
        match self.potential {
            PairKind::LennardJones { .. } => format!("lj-N{}", self.atoms),
            PairKind::Morse { rho, .. } => format!("morse-N{}-rho{}", self.atoms, rho),
        }
    }

    /// Cartesian positions of all atoms.
    pub fn embed(&self, x: &[f64]) -> Result<Vec<[f64; 3]>> {
        check_point(x, self.dim())?;
        let mut pos = Vec::with_capacity(self.atoms);
        pos.push([0.0; 3]);
        pos.push([x[0], 0.0, 0.0]);
        if self.atoms > 2 {
            pos.push([x[1], x[2], 0.0]);
            pos.extend(x[3..].chunks_exact(3).map(|c| [c[0], c[1], c[2]]));
        }
        Ok(pos)
    }

    /// Inverse of [`Cluster::embed`] for positions already in the fixed frame.
    pub fn free_coords(&self, pos: &[[f64; 3]]) -> Vec<f64> {
        let mut x = vec![pos[1][0]];
        if pos.len() > 2 {
            x.extend_from_slice(&[pos[2][0], pos[2][1]]);
            for p in &pos[3..] {
                x.extend_from_slice(p);
            }
        }
        x
    }

    fn pairs<'a>(
        &self,
        pos: &'a [[f64; 3]],
    ) -> impl Iterator<Item = Result<(usize, usize, f64)>> + 'a {
        let n = pos.len();
        (0..n).flat_map(move |i| {
            (i + 1..n).map(move |j| {
                let r = distance(&pos[i], &pos[j]);
                if r < MIN_SEPARATION {
                    Err(Error::Coincident { i, j, r })
                } else {
                    Ok((i, j, r))
                }
            })
        })
    }
}

impl Problem for Cluster {
    fn dim(&self) -> usize {
        if self.atoms == 2 {
            1
        } else {
            3 * self.atoms - 6
        }
    }

    fn energy(&self, x: &[f64]) -> Result<f64> {
        let pos = self.embed(x)?;
        let mut e = 0.0;
        for pair in self.pairs(&pos) {
            let (_, _, r) = pair?;
            e += self.potential.energy(r);
        }
        Ok(e)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let pos = self.embed(x)?;
        let mut force = vec![[0.0; 3]; pos.len()];
        for pair in self.pairs(&pos) {
            let (i, j, r) = pair?;
            let w = self.potential.derivative(r) / r;
            for k in 0..3 {
                let d = w * (pos[i][k] - pos[j][k]);
                force[i][k] += d;
                force[j][k] -= d;
            }
        }
        Ok(self.free_coords(&force))
    }

    /// Random geometry in a cube around the origin with every pair at least
    /// 0.5 apart (rejection sampled).
    fn sample_start(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let r_min = self.potential.r_min();
        let half = r_min * (0.8 * (self.atoms as f64).cbrt()).max(1.2);
        let mut x = Vec::new();
        for _ in 0..10_000 {
            x = (0..self.dim()).map(|_| rng.random_range(-half..=half)).collect();
            if let Ok(pos) = self.embed(&x) {
                let ok = (0..pos.len())
                    .all(|i| (i + 1..pos.len()).all(|j| distance(&pos[i], &pos[j]) >= 0.5 * r_min));
                if ok {
                    break;
                }
            }
        }
        x
    }

    fn grid_axis(&self, k: usize) -> Vec<f64> {
        let r = self.potential.r_min();
        linspace(-1.5 * r, 1.5 * r, k)
    }
}
