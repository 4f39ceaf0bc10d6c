//! On-disk instance and result records.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use spbench_core::cluster::{Cluster, Thomson};
use spbench_core::game::NashSystem;
use spbench_core::lattice::{Phi4, XyModel};
use spbench_core::puzzle::PuzzleSystem;
use spbench_core::solvers::{CampaignStats, SolverConfig};
use spbench_core::{Family, Model, Problem, ProblemInstance, SolutionSet};

use crate::json;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub family: String,
    pub label: String,
    /// The family's own record (couplings, payoffs and puzzle data inline).
    pub params: Value,
}

impl InstanceFile {
    pub fn from_instance(inst: &ProblemInstance) -> anyhow::Result<Self> {
        let params = match &inst.model {
            Model::Phi4(m) => serde_json::to_value(m),
            Model::Xy(m) => serde_json::to_value(m),
            Model::Thomson(m) => serde_json::to_value(m),
            Model::Cluster(m) => serde_json::to_value(m),
            Model::Nash(m) => serde_json::to_value(m),
            Model::Puzzle(m) => serde_json::to_value(m),
        }?;
        Ok(InstanceFile {
            schema_version: SCHEMA_VERSION,
            family: inst.family().name().to_string(),
            label: inst.label.clone(),
            params,
        })
    }

    pub fn to_instance(&self) -> anyhow::Result<ProblemInstance> {
        if self.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema_version {}", self.schema_version);
        }
        let family = Family::from_name(&self.family).with_context(|| format!("unknown family {:?}", self.family))?;
        let p = self.params.clone();
        let model: Model = match family {
            Family::Phi4 => serde_json::from_value::<Phi4>(p)?.into(),
            Family::Xy => serde_json::from_value::<XyModel>(p)?.into(),
            Family::Thomson => serde_json::from_value::<Thomson>(p)?.into(),
            Family::LennardJones | Family::Morse => serde_json::from_value::<Cluster>(p)?.into(),
            Family::Nash => serde_json::from_value::<NashSystem>(p)?.into(),
            Family::Puzzle => serde_json::from_value::<PuzzleSystem>(p)?.into(),
        };
        if model.family() != family {
            bail!("params describe a {} instance, not {}", model.family(), family);
        }
        Ok(ProblemInstance { label: self.label.clone(), model })
    }

    pub fn load(path: &Path) -> anyhow::Result<ProblemInstance> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let file: InstanceFile =
            serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
        file.to_instance().with_context(|| format!("building instance from {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        json::write_json(path, self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    #[serde(flatten)]
    pub counts: CampaignStats,
    /// Seconds; only recorded on request so that reruns stay byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub schema_version: u32,
    pub instance_label: String,
    pub family: String,
    pub dimension: usize,
    pub solver: SolverConfig,
    pub solutions: SolutionSet,
    pub campaign_stats: Stats,
}

impl ResultFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let r: ResultFile = serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
        if r.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema_version {}", r.schema_version);
        }
        Ok(r)
    }

    /// Loads a result and rechecks every stored solution's residual against
    /// `instance`.
    pub fn load_validated(path: &Path, instance: &ProblemInstance) -> anyhow::Result<Self> {
        let r = Self::load(path)?;
        let problems = crate::verify::check(instance, &r);
        if !problems.is_empty() {
            bail!("{} stored solution(s) fail revalidation: {}", problems.len(), problems.join("; "));
        }
        Ok(r)
    }

    pub fn to_bytes(&self) -> anyhow::Result<Vec<u8>> {
        Ok(json::to_bytes(self)?)
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        json::write_json(path, self)
    }

    pub fn new(instance: &ProblemInstance, solver: SolverConfig, solutions: SolutionSet, stats: Stats) -> Self {
        ResultFile {
            schema_version: SCHEMA_VERSION,
            instance_label: instance.label.clone(),
            family: instance.family().name().to_string(),
            dimension: instance.dim(),
            solver,
            solutions,
            campaign_stats: stats,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use spbench_core::game::NashGame;
    use spbench_core::lattice::{Boundary, Disorder};
    use spbench_core::puzzle::{Encoding, Puzzle};

    fn every_family() -> Vec<ProblemInstance> {
        let (puzzle, _) = Puzzle::grid(2, 2, 3, 4).unwrap();
        vec![
            ProblemInstance::new(Phi4::with_defaults(2, 0.25).unwrap()),
            ProblemInstance::new(XyModel::new(2, 3, Boundary::AntiPeriodic, Disorder::Uniform(-0.5, 1.5), 7, true).unwrap()),
            ProblemInstance::new(Thomson::new(4).unwrap()),
            ProblemInstance::new(Cluster::lennard_jones(4).unwrap()),
            ProblemInstance::new(Cluster::morse(3, 6.0).unwrap()),
            ProblemInstance::new(NashSystem::new(NashGame::random(vec![2, 3], 1).unwrap())),
            ProblemInstance::new(PuzzleSystem::new(puzzle, Encoding::default()).unwrap()).with_label("custom"),
        ]
    }

    #[test]
    fn instance_files_round_trip() {
        for inst in every_family() {
            let file = InstanceFile::from_instance(&inst).unwrap();
            let bytes = json::to_bytes(&file).unwrap();
            let parsed: InstanceFile = serde_json::from_slice(&bytes).unwrap();
            assert_eq!(parsed.to_instance().unwrap(), inst);
            assert_eq!(json::to_bytes(&parsed).unwrap(), bytes, "{}", inst.label);
        }
    }

    #[test]
    fn family_mismatch_rejected() {
        let inst = ProblemInstance::new(Cluster::morse(3, 6.0).unwrap());
        let mut file = InstanceFile::from_instance(&inst).unwrap();
        file.family = "lj".into();
        assert!(file.to_instance().is_err());
        file.family = "nope".into();
        assert!(file.to_instance().is_err());
    }
}
