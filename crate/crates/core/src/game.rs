//! Nash equilibria of finite `n`-player games as a square polynomial system.
//!
//! For every player `i` and pure strategy `k` the system carries the
//! multilinear equation `p⁽ⁱ⁾ₖ (πᵢ − uᵢ(k, p₋ᵢ))`, where `uᵢ(k, p₋ᵢ)` is the
//! payoff of playing `k` against the others' mixed strategies, followed by
//! one simplex equation `Σⱼ p⁽ⁱ⁾ⱼ − 1` per player. The unknowns are flattened
//! as all probability blocks in player order, then `π`.

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{check_point, invalid, Error, Result};
use crate::problem::Problem;

/// Upper bound on the number of pure profiles `Π dᵢ`.
pub const MAX_PROFILES: usize = 10_000;

/// Payoff tensors of an `n`-player game, stored flat in row-major order
/// (player 0's strategy index varies slowest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameJson", into = "GameJson")]
pub struct NashGame {
    strategy_counts: Vec<usize>,
    payoffs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct GameJson {
    players: usize,
    strategy_counts: Vec<usize>,
    payoffs: Vec<Value>,
}

impl TryFrom<GameJson> for NashGame {
    type Error = Error;
    fn try_from(g: GameJson) -> Result<Self> {
        if g.players != g.strategy_counts.len() || g.players != g.payoffs.len() {
            return invalid("players, strategy_counts and payoffs disagree on the player count");
        }
        let payoffs = g
            .payoffs
            .iter()
            .map(|v| {
                let mut flat = Vec::new();
                flatten(v, &g.strategy_counts, &mut flat)?;
                Ok(flat)
            })
            .collect::<Result<Vec<_>>>()?;
        NashGame::new(g.strategy_counts, payoffs)
    }
}

impl From<NashGame> for GameJson {
    fn from(g: NashGame) -> GameJson {
        GameJson {
            players: g.players(),
            payoffs: g.payoffs.iter().map(|t| nest(t, &g.strategy_counts)).collect(),
            strategy_counts: g.strategy_counts,
        }
    }
}

fn flatten(v: &Value, shape: &[usize], out: &mut Vec<f64>) -> Result<()> {
    match shape.split_first() {
        None => match v.as_f64() {
            Some(x) => {
                out.push(x);
                Ok(())
            }
            None => invalid("payoff entry is not a number"),
        },
        Some((&d, rest)) => match v.as_array() {
            Some(items) if items.len() == d => items.iter().try_for_each(|it| flatten(it, rest, out)),
            _ => invalid(format!("payoff array does not match strategy count {d}")),
        },
    }
}

fn nest(flat: &[f64], shape: &[usize]) -> Value {
    match shape.split_first() {
        None => Value::from(flat[0]),
        Some((&d, rest)) => {
            let stride = flat.len() / d;
            Value::Array((0..d).map(|j| nest(&flat[j * stride..(j + 1) * stride], rest)).collect())
        }
    }
}

/// Mixed strategies `p⁽ⁱ⁾` together with the payoff variables `π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub probs: Vec<Vec<f64>>,
    pub payoffs: Vec<f64>,
}

impl StrategyProfile {
    pub fn new(probs: Vec<Vec<f64>>, payoffs: Vec<f64>) -> Self {
        StrategyProfile { probs, payoffs }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.probs.iter().flatten().chain(&self.payoffs).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Residual { equation: usize, value: f64 },
    NegativeProbability { player: usize, strategy: usize, value: f64 },
    Simplex { player: usize, sum: f64 },
    /// `πᵢ − uᵢ(k, p₋ᵢ) < 0`: player `i` gains by switching to `k`.
    ProfitableDeviation { player: usize, strategy: usize, gap: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub is_equilibrium: bool,
    pub violations: Vec<Violation>,
}

impl NashGame {
    pub fn new(strategy_counts: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let n = strategy_counts.len();
        if n < 2 {
            return invalid(format!("a game needs at least 2 players, got {n}"));
        }
        if strategy_counts.contains(&0) {
            return invalid("every player needs at least one strategy");
        }
        let profiles = strategy_counts
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&p| p <= MAX_PROFILES);
        let Some(profiles) = profiles else {
            return invalid(format!("game exceeds {MAX_PROFILES} pure profiles"));
        };
        if payoffs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: payoffs.len() });
        }
        for t in &payoffs {
            if t.len() != profiles {
                return Err(Error::DimensionMismatch { expected: profiles, got: t.len() });
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("payoff tensor"));
            }
        }
        Ok(NashGame { strategy_counts, payoffs })
    }

    /// Two-player game from row-major payoff matrices.
    pub fn bimatrix(rows: usize, cols: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::new(vec![rows, cols], vec![a, b])
    }

    pub fn matching_pennies() -> Self {
        Self::bimatrix(2, 2, vec![1.0, -1.0, -1.0, 1.0], vec![-1.0, 1.0, 1.0, -1.0])
            .expect("valid game")
    }

    pub fn prisoners_dilemma() -> Self {
        Self::bimatrix(2, 2, vec![-1.0, -3.0, 0.0, -2.0], vec![-1.0, 0.0, -3.0, -2.0])
            .expect("valid game")
    }

    /// Payoffs drawn uniformly from `[-1, 1]`.
    pub fn random(strategy_counts: Vec<usize>, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profiles: usize = strategy_counts.iter().product();
        let payoffs = (0..strategy_counts.len())
            .map(|_| (0..profiles).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect();
        Self::new(strategy_counts, payoffs)
    }

    pub fn players(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn payoff_tensor(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    /// `n + Σ dᵢ`.
    pub fn system_dim(&self) -> usize {
        self.players() + self.strategy_counts.iter().sum::<usize>()
    }

    fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        let n = self.players();
        if profile.probs.len() != n || profile.payoffs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: profile.probs.len().min(profile.payoffs.len()),
            });
        }
        for (p, &d) in profile.probs.iter().zip(&self.strategy_counts) {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
        }
        Ok(())
    }

    /// `Σ_J X⁽ⁱ⁾_J Π_j factors[j][J_j]`.
    fn contract(&self, player: usize, factors: &[&[f64]]) -> f64 {
        let counts = &self.strategy_counts;
        let mut idx = vec![0usize; counts.len()];
        let mut total = 0.0;
        for &x in &self.payoffs[player] {
            let w: f64 = idx.iter().zip(factors).map(|(&j, f)| f[j]).product();
            total += x * w;
            for (d, &c) in idx.iter_mut().zip(counts).rev() {
                *d += 1;
                if *d < c {
                    break;
                }
                *d = 0;
            }
        }
        total
    }

    /// Player `i`'s expected payoff under the mixed profile.
    pub fn expected_payoff(&self, profile: &StrategyProfile, player: usize) -> Result<f64> {
        self.check_profile(profile)?;
        if player >= self.players() {
            return invalid(format!("no player {player}"));
        }
        let factors: Vec<&[f64]> = profile.probs.iter().map(Vec::as_slice).collect();
        Ok(self.contract(player, &factors))
    }

    /// Payoff to `player` for pure strategy `k` against the others' mixes.
    pub fn deviation_payoff(&self, profile: &StrategyProfile, player: usize, k: usize) -> Result<f64> {
        self.check_profile(profile)?;
        let onehot = unit(self.strategy_counts[player], k);
        let mut factors: Vec<&[f64]> = profile.probs.iter().map(Vec::as_slice).collect();
        factors[player] = &onehot;
        Ok(self.contract(player, &factors))
    }

    /// The multilinear equations, player-major, then the simplex sums.
    pub fn nash_residual(&self, profile: &StrategyProfile) -> Result<Vec<f64>> {
        self.check_profile(profile)?;
        let mut r = Vec::with_capacity(self.system_dim());
        for (i, p) in profile.probs.iter().enumerate() {
            for (k, &pk) in p.iter().enumerate() {
                r.push(pk * (profile.payoffs[i] - self.deviation_payoff(profile, i, k)?));
            }
        }
        r.extend(profile.probs.iter().map(|p| p.iter().sum::<f64>() - 1.0));
        Ok(r)
    }

    /// Checks the system residual, feasibility, and that no pure deviation
    /// beats `πᵢ`, all within `tol`.
    pub fn is_equilibrium(&self, profile: &StrategyProfile, tol: f64) -> Result<EquilibriumReport> {
        let mut violations = Vec::new();
        for (equation, &value) in self.nash_residual(profile)?.iter().enumerate() {
            if value.abs() > tol {
                violations.push(Violation::Residual { equation, value });
            }
        }
        for (player, p) in profile.probs.iter().enumerate() {
            for (strategy, &value) in p.iter().enumerate() {
                if value < -tol {
                    violations.push(Violation::NegativeProbability { player, strategy, value });
                }
                let gap = profile.payoffs[player] - self.deviation_payoff(profile, player, strategy)?;
                if gap < -tol {
                    violations.push(Violation::ProfitableDeviation { player, strategy, gap });
                }
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > tol {
                violations.push(Violation::Simplex { player, sum });
            }
        }
        Ok(EquilibriumReport {
            is_equilibrium: violations.is_empty(),
            violations,
        })
    }

    pub fn profile_from_flat(&self, x: &[f64]) -> Result<StrategyProfile> {
        check_point(x, self.system_dim())?;
        let mut probs = Vec::with_capacity(self.players());
        let mut at = 0;
        for &d in &self.strategy_counts {
            probs.push(x[at..at + d].to_vec());
            at += d;
        }
        Ok(StrategyProfile::new(probs, x[at..].to_vec()))
    }

    /// Analytic Jacobian of [`NashGame::nash_residual`] in the flat layout.
    pub fn jacobian(&self, profile: &StrategyProfile) -> Result<DMatrix<f64>> {
        self.check_profile(profile)?;
        let n = self.players();
        let dim = self.system_dim();
        let offsets: Vec<usize> = self
            .strategy_counts
            .iter()
            .scan(0, |acc, &d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect();
        let pi_col = |i: usize| dim - n + i;
        let mut jac = DMatrix::zeros(dim, dim);
        let mut row = 0;
        for i in 0..n {
            for k in 0..self.strategy_counts[i] {
                let pk = profile.probs[i][k];
                jac[(row, offsets[i] + k)] =
                    profile.payoffs[i] - self.deviation_payoff(profile, i, k)?;
                jac[(row, pi_col(i))] = pk;
                if pk != 0.0 {
                    let ek = unit(self.strategy_counts[i], k);
                    for m in (0..n).filter(|&m| m != i) {
                        for l in 0..self.strategy_counts[m] {
                            let el = unit(self.strategy_counts[m], l);
                            let mut factors: Vec<&[f64]> =
                                profile.probs.iter().map(Vec::as_slice).collect();
                            factors[i] = &ek;
                            factors[m] = &el;
                            jac[(row, offsets[m] + l)] = -pk * self.contract(i, &factors);
                        }
                    }
                }
                row += 1;
            }
        }
        for i in 0..n {
            for j in 0..self.strategy_counts[i] {
                jac[(row, offsets[i] + j)] = 1.0;
            }
            row += 1;
        }
        Ok(jac)
    }
}

fn unit(len: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; len];
    e[k] = 1.0;
    e
}

/// The Nash system as a root-finding problem over the flat vector.
///
/// Its objective is the merit function `½‖f‖²`, so stationary points of the
/// objective include (but are not limited to) roots of the system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NashSystem {
    game: NashGame,
}

impl NashSystem {
    pub fn new(game: NashGame) -> Self {
        NashSystem { game }
    }

    pub fn game(&self) -> &NashGame {
        &self.game
    }

    pub fn default_label(&self) -> String {
        let dims: Vec<String> = self.game.strategy_counts.iter().map(|d| d.to_string()).collect();
        format!("nash-{}", dims.join("x"))
    }
}

impl Problem for NashSystem {
    fn dim(&self) -> usize {
        self.game.system_dim()
    }

    fn energy(&self, x: &[f64]) -> Result<f64> {
        let f = self.residual(x)?;
        Ok(0.5 * f.iter().map(|v| v * v).sum::<f64>())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let f = nalgebra::DVector::from_vec(self.residual(x)?);
        let j = self.jacobian(x)?;
        Ok((j.transpose() * f).as_slice().to_vec())
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.game.nash_residual(&self.game.profile_from_flat(x)?)
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.game.jacobian(&self.game.profile_from_flat(x)?)
    }

    /// Positive simplex samples (normalized exponentials) and payoff
    /// variables drawn from each player's payoff range.
    fn sample_start(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        for &d in &self.game.strategy_counts {
            let w: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let s: f64 = w.iter().sum();
            x.extend(w.iter().map(|v| v / s));
        }
        for t in &self.game.payoffs {
            let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            x.push(if hi > lo { rng.random_range(lo..=hi) } else { lo });
        }
        x
    }
}
