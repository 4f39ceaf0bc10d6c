//! Independent recheck of stored solutions.

use spbench_core::validate::norm;
use spbench_core::{classify, Problem, ProblemInstance, Provenance};

use crate::files::ResultFile;

/// Every discrepancy between `result` and a fresh evaluation on `instance`,
/// one message per failing solution. Empty means the file verifies.
pub fn check(instance: &ProblemInstance, result: &ResultFile) -> Vec<String> {
    let mut problems = Vec::new();
    if result.instance_label != instance.label {
        problems.push(format!(
            "label mismatch: result is for {:?}, instance is {:?}",
            result.instance_label, instance.label
        ));
        return problems;
    }
    if result.dimension != instance.dim() {
        problems.push(format!("dimension mismatch: result {}, instance {}", result.dimension, instance.dim()));
        return problems;
    }
    let tol = result.solver.accept_tol;
    for (k, sp) in result.solutions.points.iter().enumerate() {
        if sp.label != instance.label {
            problems.push(format!("solution {k}: label {:?}", sp.label));
            continue;
        }
        let residual = match instance.residual(&sp.coords) {
            Ok(r) => norm(&r),
            Err(e) => {
                problems.push(format!("solution {k}: evaluation failed: {e}"));
                continue;
            }
        };
        if !(residual <= tol) {
            problems.push(format!("solution {k}: residual {residual:.3e} > tol {tol:.3e}"));
            continue;
        }
        match classify(instance, &sp.coords, &result.solver.classify, Provenance::new(sp.provenance.solver, 0, 0)) {
            Ok(fresh) => {
                let energy_tol = 1e-9 * (1.0 + sp.energy.abs());
                if (fresh.energy - sp.energy).abs() > energy_tol {
                    problems.push(format!("solution {k}: energy {} stored, {} recomputed", sp.energy, fresh.energy));
                }
                if fresh.index != sp.index || fresh.zero_eigs != sp.zero_eigs {
                    problems.push(format!(
                        "solution {k}: index/zero modes {}/{} stored, {}/{} recomputed",
                        sp.index, sp.zero_eigs, fresh.index, fresh.zero_eigs
                    ));
                }
            }
            Err(e) => problems.push(format!("solution {k}: classification failed: {e}")),
        }
    }
    problems
}
