//! Command-line harness: instance files, solver campaigns, reports and
//! verification, with byte-stable JSON output.

pub mod cli;
pub mod files;
pub mod json;
pub mod report;
pub mod verify;

pub use files::{InstanceFile, ResultFile, Stats};
pub use report::Report;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Parse, I/O or argument errors.
    pub const FAILURE: i32 = 1;
    pub const NO_SOLUTIONS: i32 = 2;
    pub const VERIFY_FAILED: i32 = 3;
}

/// Worker count from `SPBENCH_THREADS`, else the number of logical cores.
pub fn threads_from_env() -> usize {
    std::env::var("SPBENCH_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
