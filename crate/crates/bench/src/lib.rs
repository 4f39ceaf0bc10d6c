//! Fixed instances shared by the criterion benches.

use spbench_core::cluster::{Cluster, Thomson};
use spbench_core::game::{NashGame, NashSystem};
use spbench_core::lattice::{Boundary, Disorder, Phi4, XyModel};
use spbench_core::puzzle::{Encoding, Puzzle, PuzzleSystem};
use spbench_core::ProblemInstance;

pub fn phi4(side: usize, coupling: f64) -> ProblemInstance {
    ProblemInstance::new(Phi4::with_defaults(side, coupling).expect("valid phi4"))
}

pub fn xy(d: usize, side: usize, seed: u64) -> ProblemInstance {
    ProblemInstance::new(
        XyModel::new(d, side, Boundary::Periodic, Disorder::UniformSigned, seed, true).expect("valid xy"),
    )
}

pub fn thomson(electrons: usize) -> ProblemInstance {
    ProblemInstance::new(Thomson::new(electrons).expect("valid thomson"))
}

pub fn lj(atoms: usize) -> ProblemInstance {
    ProblemInstance::new(Cluster::lennard_jones(atoms).expect("valid cluster"))
}

pub fn morse(atoms: usize, rho: f64) -> ProblemInstance {
    ProblemInstance::new(Cluster::morse(atoms, rho).expect("valid cluster"))
}

pub fn nash(counts: &[usize], seed: u64) -> ProblemInstance {
    ProblemInstance::new(NashSystem::new(NashGame::random(counts.to_vec(), seed).expect("valid game")))
}

pub fn puzzle(rows: usize, cols: usize, seed: u64) -> ProblemInstance {
    let (p, _) = Puzzle::grid(rows, cols, 3, seed).expect("valid puzzle");
    ProblemInstance::new(PuzzleSystem::new(p, Encoding::default()).expect("valid encoding"))
}
