//! Edge-matching puzzles with translation-only pieces.
//!
//! Every edge element carries a centre offset `b` relative to its piece, a
//! colour and an orientation. A placement solves the puzzle when every edge
//! sits on exactly one partner of equal colour and opposite orientation.
//! Grouping edges by `(colour, orientation)` with a signed indicator gives
//! moment equations that every solution satisfies: the first moment (linear
//! encoding) admits spurious solutions, the exponential moments
//! `Σ s·exp(kᵀ(tᵢ + bᵢⱼ))` separate them.

use std::f64::consts::{PI, TAU};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_point, invalid, Error, Result};
use crate::problem::{linspace, Problem};

/// Angles closer than this (mod 2π) are the same orientation.
pub const ANGLE_TOL: f64 = 1e-9;

pub type Color = u32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub b: [f64; 2],
    pub c: Color,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PieceDesc {
    pub edges: Vec<Edge>,
}

/// Canonical representative of an angle in `[0, 2π)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let a = theta.rem_euclid(TAU);
    if TAU - a < ANGLE_TOL {
        0.0
    } else {
        a
    }
}

fn same_angle(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(TAU);
    d < ANGLE_TOL || TAU - d < ANGLE_TOL
}

/// `+1` if the edge has exactly `(c, θ)`, `−1` if it has colour `c` and the
/// opposite orientation `θ + π`, `0` otherwise.
pub fn signed_indicator(edge: &Edge, c: Color, theta: f64) -> i8 {
    if edge.c != c {
        0
    } else if same_angle(edge.theta, theta) {
        1
    } else if same_angle(edge.theta, theta + PI) {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub translations: Vec<[f64; 2]>,
}

impl Placement {
    pub fn to_flat(&self) -> Vec<f64> {
        self.translations.iter().flatten().copied().collect()
    }

    pub fn from_flat(x: &[f64]) -> Placement {
        Placement {
            translations: x.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
        }
    }

    /// Componentwise `Tᵢ = (e^{tᵢₓ}, e^{tᵢᵧ})`, so that `e^{kᵀtᵢ} = Tᵢₓ^{kₓ} Tᵢᵧ^{kᵧ}`.
    pub fn exp_coordinates(&self) -> Vec<[f64; 2]> {
        self.translations.iter().map(|t| [t[0].exp(), t[1].exp()]).collect()
    }

    pub fn from_exp_coordinates(big_t: &[[f64; 2]]) -> Placement {
        Placement {
            translations: big_t.iter().map(|t| [t[0].ln(), t[1].ln()]).collect(),
        }
    }
}

/// Frame (piece 0, never translated) plus `N` movable pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PuzzleJson")]
pub struct Puzzle {
    frame: PieceDesc,
    pieces: Vec<PieceDesc>,
    colors: Vec<Color>,
    #[serde(skip)]
    classes: Vec<(Color, f64)>,
}

#[derive(Deserialize)]
struct PuzzleJson {
    frame: PieceDesc,
    pieces: Vec<PieceDesc>,
    colors: Vec<Color>,
}

impl TryFrom<PuzzleJson> for Puzzle {
    type Error = Error;
    fn try_from(p: PuzzleJson) -> Result<Self> {
        Puzzle::new(p.frame, p.pieces, p.colors)
    }
}

impl Puzzle {
    /// Validates edges and checks that every `(c, θ)` class is balanced by
    /// as many `(c, θ + π)` edges.
    pub fn new(frame: PieceDesc, pieces: Vec<PieceDesc>, colors: Vec<Color>) -> Result<Self> {
        let mut frame = frame;
        let mut pieces = pieces;
        for e in frame.edges.iter_mut().chain(pieces.iter_mut().flat_map(|p| p.edges.iter_mut())) {
            if !(e.b[0].is_finite() && e.b[1].is_finite() && e.theta.is_finite()) {
                return Err(Error::NonFinite("puzzle edge"));
            }
            if !colors.contains(&e.c) {
                return invalid(format!("edge colour {} is not in the colour set", e.c));
            }
            e.theta = canonical_angle(e.theta);
        }
        let mut classes: Vec<(Color, f64)> = Vec::new();
        for e in frame.edges.iter().chain(pieces.iter().flat_map(|p| &p.edges)) {
            if !classes.iter().any(|&(c, t)| c == e.c && same_angle(t, e.theta)) {
                classes.push((e.c, e.theta));
            }
        }
        classes.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut puzzle = Puzzle {
            frame,
            pieces,
            colors,
            classes,
        };
        for &(c, theta) in &puzzle.classes {
            let net: i64 = puzzle.all_edges().map(|(_, e)| signed_indicator(e, c, theta) as i64).sum();
            if net != 0 {
                return invalid(format!(
                    "unbalanced edge class (colour {c}, angle {theta}): net count {net}"
                ));
            }
        }
        puzzle.classes.shrink_to_fit();
        Ok(puzzle)
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn pieces(&self) -> &[PieceDesc] {
        &self.pieces
    }

    pub fn frame(&self) -> &PieceDesc {
        &self.frame
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    /// Every `(c, θ)` pair that occurs on some edge, sorted.
    pub fn classes(&self) -> &[(Color, f64)] {
        &self.classes
    }

    /// `(piece index, edge)` with the frame as piece 0.
    fn all_edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        std::iter::once(&self.frame)
            .chain(&self.pieces)
            .enumerate()
            .flat_map(|(i, p)| p.edges.iter().map(move |e| (i, e)))
    }

    fn check_placement(&self, placement: &Placement) -> Result<()> {
        if placement.translations.len() != self.pieces.len() {
            return Err(Error::DimensionMismatch {
                expected: self.pieces.len(),
                got: placement.translations.len(),
            });
        }
        if placement.translations.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("placement"));
        }
        Ok(())
    }

    fn translation(placement: &Placement, piece: usize) -> [f64; 2] {
        if piece == 0 {
            [0.0, 0.0]
        } else {
            placement.translations[piece - 1]
        }
    }

    fn absolute(placement: &Placement, piece: usize, e: &Edge) -> [f64; 2] {
        let t = Self::translation(placement, piece);
        [t[0] + e.b[0], t[1] + e.b[1]]
    }

    /// `Σ s(c, θ)·(tᵢ + bᵢⱼ)` for every class, two entries per class.
    pub fn linear_residual(&self, placement: &Placement) -> Result<Vec<f64>> {
        self.check_placement(placement)?;
        let mut r = Vec::with_capacity(2 * self.classes.len());
        for &(c, theta) in &self.classes {
            let mut acc = [0.0; 2];
            for (i, e) in self.all_edges() {
                let s = signed_indicator(e, c, theta) as f64;
                if s != 0.0 {
                    let u = Self::absolute(placement, i, e);
                    acc[0] += s * u[0];
                    acc[1] += s * u[1];
                }
            }
            r.extend_from_slice(&acc);
        }
        Ok(r)
    }

    /// `Σ s(c, θ)·exp(kᵀ(tᵢ + bᵢⱼ))` for every class and every `k`, class-major.
    ///
    /// Exponents are shifted by the per-class maximum and positive and
    /// negative terms are summed separately in sorted order, so edges that
    /// coincide exactly cancel exactly.
    pub fn exponential_residual(&self, placement: &Placement, k_set: &[[f64; 2]]) -> Result<Vec<f64>> {
        self.check_placement(placement)?;
        if k_set.is_empty() {
            return invalid("k_set must not be empty");
        }
        if k_set.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("k_set"));
        }
        let mut r = Vec::with_capacity(self.classes.len() * k_set.len());
        for &(c, theta) in &self.classes {
            let members: Vec<(f64, [f64; 2])> = self
                .all_edges()
                .filter_map(|(i, e)| {
                    let s = signed_indicator(e, c, theta);
                    (s != 0).then(|| (s as f64, Self::absolute(placement, i, e)))
                })
                .collect();
            for k in k_set {
                let exps: Vec<(f64, f64)> = members
                    .iter()
                    .map(|&(s, u)| (s, k[0] * u[0] + k[1] * u[1]))
                    .collect();
                let shift = exps.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
                if !shift.is_finite() {
                    r.push(0.0);
                    continue;
                }
                let sorted_sum = |sign: f64| {
                    let mut terms: Vec<f64> = exps
                        .iter()
                        .filter(|e| e.0 == sign)
                        .map(|e| (e.1 - shift).exp())
                        .collect();
                    terms.sort_by(f64::total_cmp);
                    terms.iter().sum::<f64>()
                };
                let diff = sorted_sum(1.0) - sorted_sum(-1.0);
                if diff == 0.0 {
                    r.push(0.0);
                    continue;
                }
                let scale = shift.exp();
                let value = diff * scale;
                if !value.is_finite() {
                    return Err(Error::Overflow);
                }
                r.push(value);
            }
        }
        Ok(r)
    }

    /// The exponential residual for one `k` evaluated through the
    /// substitution `Tᵢ = exp(tᵢ)` (componentwise): `Σ s·Tᵢ^k·e^{kᵀbᵢⱼ}`.
    pub fn exponential_residual_substituted(&self, big_t: &[[f64; 2]], k: [f64; 2]) -> Result<Vec<f64>> {
        if big_t.len() != self.pieces.len() {
            return Err(Error::DimensionMismatch { expected: self.pieces.len(), got: big_t.len() });
        }
        let monomial = |piece: usize| -> f64 {
            if piece == 0 {
                1.0
            } else {
                let t = big_t[piece - 1];
                t[0].powf(k[0]) * t[1].powf(k[1])
            }
        };
        Ok(self
            .classes
            .iter()
            .map(|&(c, theta)| {
                self.all_edges()
                    .map(|(i, e)| {
                        signed_indicator(e, c, theta) as f64
                            * monomial(i)
                            * (k[0] * e.b[0] + k[1] * e.b[1]).exp()
                    })
                    .sum()
            })
            .collect())
    }

    /// Ground-truth check: every edge element coincides (within `tol`) with
    /// exactly one other edge of the same colour and opposite orientation.
    pub fn verify_geometric(&self, placement: &Placement, tol: f64) -> bool {
        if self.check_placement(placement).is_err() {
            return false;
        }
        let edges: Vec<(usize, [f64; 2], Color, f64)> = self
            .all_edges()
            .map(|(i, e)| (i, Self::absolute(placement, i, e), e.c, e.theta))
            .collect();
        edges.iter().enumerate().all(|(a, ea)| {
            let partners = edges
                .iter()
                .enumerate()
                .filter(|&(b, eb)| {
                    b != a
                        && eb.2 == ea.2
                        && same_angle(eb.3, ea.3 + PI)
                        && ((eb.1[0] - ea.1[0]).powi(2) + (eb.1[1] - ea.1[1]).powi(2)).sqrt() <= tol
                })
                .count();
            partners == 1
        })
    }

    /// Axis-aligned bounding box of the frame edges, `[xmin, ymin, xmax, ymax]`.
    pub fn frame_bounds(&self) -> [f64; 4] {
        let mut bb = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for e in &self.frame.edges {
            bb[0] = bb[0].min(e.b[0]);
            bb[1] = bb[1].min(e.b[1]);
            bb[2] = bb[2].max(e.b[0]);
            bb[3] = bb[3].max(e.b[1]);
        }
        if !bb[0].is_finite() {
            bb = [0.0, 0.0, 0.0, 0.0];
        }
        bb
    }

    /// Cuts a `rows × cols` frame into unit squares, colours every shared
    /// side at random from `n_colors` colours, and shuffles the pieces.
    /// Returns the puzzle and its intended placement.
    pub fn grid(rows: usize, cols: usize, n_colors: u32, seed: u64) -> Result<(Puzzle, Placement)> {
        if n_colors == 0 {
            return invalid("need at least one colour");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::grid_with(rows, cols, (0..n_colors).collect(), |_| rng.random_range(0..n_colors), &mut ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15))
    }

    fn grid_with(
        rows: usize,
        cols: usize,
        colors: Vec<Color>,
        mut color_of: impl FnMut(bool) -> Color,
        shuffle_rng: &mut ChaCha8Rng,
    ) -> Result<(Puzzle, Placement)> {
        if rows == 0 || cols == 0 {
            return invalid("grid puzzle needs at least one cell");
        }
        // Vertical sides: (rows) × (cols + 1); horizontal: (rows + 1) × cols.
        let vertical: Vec<Color> = (0..rows * (cols + 1))
            .map(|i| color_of(i % (cols + 1) == 0 || i % (cols + 1) == cols))
            .collect();
        let horizontal: Vec<Color> = (0..(rows + 1) * cols)
            .map(|i| color_of(i / cols == 0 || i / cols == rows))
            .collect();
        let v = |r: usize, c: usize| vertical[r * (cols + 1) + c];
        let h = |r: usize, c: usize| horizontal[r * cols + c];
        let edge = |b: [f64; 2], c: Color, theta: f64| Edge { b, c, theta };

        let mut frame = PieceDesc::default();
        for r in 0..rows {
            let y = r as f64 + 0.5;
            frame.edges.push(edge([0.0, y], v(r, 0), 0.0));
            frame.edges.push(edge([cols as f64, y], v(r, cols), PI));
        }
        for c in 0..cols {
            let x = c as f64 + 0.5;
            frame.edges.push(edge([x, 0.0], h(0, c), PI / 2.0));
            frame.edges.push(edge([x, rows as f64], h(rows, c), 3.0 * PI / 2.0));
        }

        let mut cells: Vec<(usize, usize)> = (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect();
        cells.shuffle(shuffle_rng);
        let mut pieces = Vec::with_capacity(cells.len());
        let mut translations = Vec::with_capacity(cells.len());
        for &(r, c) in &cells {
            pieces.push(PieceDesc {
                edges: vec![
                    edge([0.5, 0.0], v(r, c + 1), 0.0),
                    edge([0.0, 0.5], h(r + 1, c), PI / 2.0),
                    edge([-0.5, 0.0], v(r, c), PI),
                    edge([0.0, -0.5], h(r, c), 3.0 * PI / 2.0),
                ],
            });
            translations.push([c as f64 + 0.5, r as f64 + 0.5]);
        }
        Ok((Puzzle::new(frame, pieces, colors)?, Placement { translations }))
    }

    /// A `1 × 3` strip whose inner sides share colour 1 and whose border is
    /// colour 0, with a placement that zeroes every linear moment without
    /// solving the puzzle: the outer pieces shift by `+δ` and the middle one
    /// by `−2δ` along x.
    pub fn linear_counterexample(delta: f64) -> (Puzzle, Placement) {
        let (puzzle, mut placement) = Self::grid_with(
            1,
            3,
            vec![0, 1],
            |border| if border { 0 } else { 1 },
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .expect("valid strip");
        for t in &mut placement.translations {
            t[0] += if t[0] == 1.5 { -2.0 * delta } else { delta };
        }
        (puzzle, placement)
    }
}

/// All integer `k ∈ {−2,…,2}²` except the origin.
pub fn default_k_set() -> Vec<[f64; 2]> {
    let mut ks = Vec::with_capacity(24);
    for kx in -2..=2 {
        for ky in -2..=2 {
            if (kx, ky) != (0, 0) {
                ks.push([kx as f64, ky as f64]);
            }
        }
    }
    ks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Encoding {
    Linear,
    Exponential { k_set: Vec<[f64; 2]> },
}

impl Default for Encoding {
    fn default() -> Self {
        Encoding::Exponential { k_set: default_k_set() }
    }
}

/// A puzzle encoding as an optimization problem over the flattened
/// translations: the objective is `½‖r(t)‖²` for the chosen moment
/// residual `r`, whose zero-energy minima include every solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuzzleSystem {
    puzzle: Puzzle,
    encoding: Encoding,
}

impl PuzzleSystem {
    pub fn new(puzzle: Puzzle, encoding: Encoding) -> Result<Self> {
        if let Encoding::Exponential { k_set } = &encoding {
            if k_set.is_empty() {
                return invalid("k_set must not be empty");
            }
        }
        Ok(PuzzleSystem { puzzle, encoding })
    }

    pub fn puzzle(&self) -> &Puzzle {
        &self.puzzle
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    pub fn default_label(&self) -> String {
        let enc = match self.encoding {
            Encoding::Linear => "lin",
            Encoding::Exponential { .. } => "exp",
        };
        format!("puzzle-N{}-{}", self.puzzle.piece_count(), enc)
    }

    fn moments(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(x, self.dim())?;
        let placement = Placement::from_flat(x);
        match &self.encoding {
            Encoding::Linear => self.puzzle.linear_residual(&placement),
            Encoding::Exponential { k_set } => self.puzzle.exponential_residual(&placement, k_set),
        }
    }
}

impl Problem for PuzzleSystem {
    fn dim(&self) -> usize {
        2 * self.puzzle.piece_count()
    }

    fn energy(&self, x: &[f64]) -> Result<f64> {
        Ok(0.5 * self.moments(x)?.iter().map(|v| v * v).sum::<f64>())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.moments(x)?;
        let placement = Placement::from_flat(x);
        let mut g = vec![0.0; x.len()];
        let classes = self.puzzle.classes();
        for (ci, &(c, theta)) in classes.iter().enumerate() {
            for (p, piece) in self.puzzle.pieces().iter().enumerate() {
                for e in &piece.edges {
                    let s = signed_indicator(e, c, theta) as f64;
                    if s == 0.0 {
                        continue;
                    }
                    match &self.encoding {
                        Encoding::Linear => {
                            g[2 * p] += r[2 * ci] * s;
                            g[2 * p + 1] += r[2 * ci + 1] * s;
                        }
                        Encoding::Exponential { k_set } => {
                            let u = Puzzle::absolute(&placement, p + 1, e);
                            for (ki, k) in k_set.iter().enumerate() {
                                let w = r[ci * k_set.len() + ki] * s * (k[0] * u[0] + k[1] * u[1]).exp();
                                g[2 * p] += w * k[0];
                                g[2 * p + 1] += w * k[1];
                            }
                        }
                    }
                }
            }
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow);
        }
        Ok(g)
    }

    /// Uniform over the frame's bounding box.
    fn sample_start(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let bb = self.puzzle.frame_bounds();
        (0..self.dim())
            .map(|i| {
                let (lo, hi) = if i % 2 == 0 { (bb[0], bb[2]) } else { (bb[1], bb[3]) };
                if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                }
            })
            .collect()
    }

    fn grid_axis(&self, k: usize) -> Vec<f64> {
        let bb = self.puzzle.frame_bounds();
        linspace(bb[0].min(bb[1]), bb[2].max(bb[3]), k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::gradient_check;

    fn red(theta: f64) -> Edge {
        Edge { b: [0.0, 0.0], c: 1, theta }
    }

    #[test]
    fn indicator_branches() {
        assert_eq!(signed_indicator(&red(0.0), 1, 0.0), 1);
        assert_eq!(signed_indicator(&red(PI), 1, 0.0), -1);
        assert_eq!(signed_indicator(&Edge { c: 2, ..red(0.0) }, 1, 0.0), 0);
        assert_eq!(signed_indicator(&red(PI / 2.0), 1, 0.0), 0);
        assert_eq!(signed_indicator(&red(3.0 * PI / 2.0), 1, PI / 2.0), -1);
        // antisymmetry under θ → θ + π
        for theta in [0.0, PI / 2.0, PI, 3.0 * PI / 2.0] {
            for e in [red(0.0), red(PI / 2.0), red(PI), red(3.0 * PI / 2.0)] {
                assert_eq!(signed_indicator(&e, 1, theta), -signed_indicator(&e, 1, theta + PI));
            }
        }
    }

    #[test]
    fn two_piece_strip() {
        let (p, placement) = Puzzle::grid(1, 2, 2, 3).unwrap();
        assert_eq!(p.piece_count(), 2);
        assert!(p.verify_geometric(&placement, 1e-9));
        assert!(p.linear_residual(&placement).unwrap().iter().all(|&v| v == 0.0));
        assert!(p
            .exponential_residual(&placement, &default_k_set())
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let mut off = placement.clone();
        off.translations[0][0] += 0.5;
        assert!(!p.verify_geometric(&off, 1e-9));
    }

    #[test]
    fn single_piece_fills_frame() {
        let (p, placement) = Puzzle::grid(1, 1, 3, 0).unwrap();
        assert!(p.verify_geometric(&placement, 1e-9));
    }

    #[test]
    fn identical_pieces_swap_freely() {
        let (p, placement) = Puzzle::grid_with(1, 2, vec![0], |_| 0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let swapped = Placement {
            translations: vec![placement.translations[1], placement.translations[0]],
        };
        assert!(p.linear_residual(&swapped).unwrap().iter().all(|&v| v == 0.0));
        assert!(p.verify_geometric(&swapped, 1e-9));
    }

    #[test]
    fn uniform_translation_of_balanced_classes() {
        // Moving every piece together shifts each class by (net count)·Δt
        // over movable pieces only; the frame's share stays put.
        let (p, placement) = Puzzle::grid(2, 2, 2, 6).unwrap();
        let base = p.linear_residual(&placement).unwrap();
        let shifted = Placement {
            translations: placement.translations.iter().map(|t| [t[0] + 0.3, t[1] - 0.1]).collect(),
        };
        let moved = p.linear_residual(&shifted).unwrap();
        for (ci, &(c, theta)) in p.classes().iter().enumerate() {
            let net: f64 = p.pieces().iter().flat_map(|q| &q.edges).map(|e| signed_indicator(e, c, theta) as f64).sum();
            assert!((moved[2 * ci] - base[2 * ci] - 0.3 * net).abs() < 1e-12);
            assert!((moved[2 * ci + 1] - base[2 * ci + 1] + 0.1 * net).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_encoding_admits_false_solutions() {
        let (p, fake) = Puzzle::linear_counterexample(0.25);
        assert!(p.linear_residual(&fake).unwrap().iter().all(|v| v.abs() < 1e-12));
        assert!(!p.verify_geometric(&fake, 1e-9));
        let exp = p.exponential_residual(&fake, &default_k_set()).unwrap();
        assert!(exp.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn frame_only_puzzle() {
        let frame = PieceDesc {
            edges: vec![
                Edge { b: [0.0, 0.0], c: 0, theta: 0.0 },
                Edge { b: [0.0, 0.0], c: 0, theta: PI },
            ],
        };
        let p = Puzzle::new(frame, vec![], vec![0]).unwrap();
        let empty = Placement { translations: vec![] };
        assert!(p.exponential_residual(&empty, &default_k_set()).unwrap().iter().all(|&v| v == 0.0));
        assert!(p.verify_geometric(&empty, 1e-9));
    }

    #[test]
    fn unbalanced_puzzle_rejected() {
        let frame = PieceDesc { edges: vec![Edge { b: [0.0, 0.0], c: 0, theta: 0.0 }] };
        assert!(Puzzle::new(frame.clone(), vec![], vec![0]).is_err());
        assert!(Puzzle::new(frame, vec![], vec![1]).is_err());
    }

    #[test]
    fn substitution_matches_direct_form() {
        let (p, placement) = Puzzle::grid(2, 2, 3, 9).unwrap();
        let moved = Placement {
            translations: placement.translations.iter().map(|t| [t[0] * 1.1, t[1] - 0.2]).collect(),
        };
        let big_t = moved.exp_coordinates();
        let back = Placement::from_exp_coordinates(&big_t);
        for (a, b) in back.translations.iter().zip(&moved.translations) {
            assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
        }
        let ks = default_k_set();
        let direct = p.exponential_residual(&moved, &ks).unwrap();
        for (ki, &k) in ks.iter().enumerate() {
            let sub = p.exponential_residual_substituted(&big_t, k).unwrap();
            for (ci, v) in sub.iter().enumerate() {
                let d = direct[ci * ks.len() + ki];
                assert!((v - d).abs() < 1e-9 * (1.0 + d.abs()));
            }
        }
    }

    #[test]
    fn overflow_is_reported() {
        let (p, placement) = Puzzle::grid(1, 2, 2, 3).unwrap();
        let mut off = placement.clone();
        off.translations[0][0] += 0.5;
        assert_eq!(p.exponential_residual(&off, &[[800.0, 0.0]]), Err(Error::Overflow));
        assert!(p.exponential_residual(&off, &[]).is_err());
    }

    #[test]
    fn system_gradients() {
        let (p, _) = Puzzle::grid(2, 2, 2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for enc in [Encoding::Linear, Encoding::default()] {
            let sys = PuzzleSystem::new(p.clone(), enc).unwrap();
            assert_eq!(sys.dim(), 8);
            for _ in 0..20 {
                let x = sys.sample_start(&mut rng);
                assert!(gradient_check(&sys, &x, 1e-5).unwrap() < 1e-6);
            }
        }
    }

    #[test]
    fn json_shape() {
        let (p, _) = Puzzle::grid(1, 2, 2, 3).unwrap();
        let v = serde_json::to_value(&p).unwrap();
        assert!(v["frame"]["edges"][0]["b"].is_array());
        assert!(v["pieces"][0]["edges"][0]["theta"].is_number());
        let back: Puzzle = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }
}
