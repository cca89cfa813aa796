//! JSON configuration documents accepted by the commands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use brouwer_core::brouwer::BrouwerConfig;
use brouwer_core::domains::blockworld::BlockworldConfig;
use brouwer_core::domains::maze::MazeConfig;
use brouwer_core::domains::regression::{RegressionConfig, System};
use brouwer_core::domains::switchboard::SwitchboardConfig;
use brouwer_core::language::PropertyId;
use brouwer_core::novelty::EvolutionConfig;
use brouwer_core::planner::SearchBudget;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Deserialize)]
struct Versioned {
    schema_version: Option<u32>,
}

/// Reads a config document, checking `schema_version` first so that an
/// unsupported version is reported as such rather than as a field error.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let v: Versioned = serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))?;
    match v.schema_version {
        Some(SCHEMA_VERSION) => {}
        Some(other) => bail!("{}: unsupported schema_version {other} (expected {SCHEMA_VERSION})", path.display()),
        None => bail!("{}: missing schema_version", path.display()),
    }
    serde_json::from_str(&text).with_context(|| format!("{} does not match the expected layout", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Maze(MazeConfig),
    Blockworld(BlockworldConfig),
    Switchboard(SwitchboardConfig),
}

/// `brouwer run` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub domain: DomainSpec,
    pub brouwer: BrouwerConfig,
    /// Master seed for the loop and its free-choice policy.
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolveMode {
    Novelty,
    Objective,
}

/// `brouwer evolve` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub maze: MazeConfig,
    pub evolution: EvolutionConfig,
    pub mode: EvolveMode,
    /// Concept (maze property ids) targeted in objective mode.
    #[serde(default)]
    pub target_concept: Vec<PropertyId>,
}

/// `brouwer contrast` input: novelty against objective selection on mazes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub maze: MazeConfig,
    pub evolution: EvolutionConfig,
    pub seeds: Vec<u64>,
    pub target_concept: Vec<PropertyId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSource {
    Generated {
        system: System,
        samples: usize,
        #[serde(default)]
        noise_sd: f64,
        #[serde(default)]
        data_seed: u64,
    },
    File {
        dataset: PathBuf,
    },
}

/// `brouwer regress` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressConfig {
    pub schema_version: u32,
    pub data: DataSource,
    #[serde(default)]
    pub regression: RegressionConfig,
    pub evolution: EvolutionConfig,
    /// Seeds to run; the first is used when `--seed` is absent and the
    /// list is not run as a batch.
    #[serde(default)]
    pub seeds: Vec<u64>,
}

/// `brouwer census` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub schema_version: u32,
    pub blockworld: BlockworldConfig,
    #[serde(default)]
    pub budget: SearchBudget,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn committed(name: &str) -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
    }

    #[test]
    fn committed_scenarios_parse() {
        for name in ["maze.json", "blockworld2.json", "switchboard4.json", "switchboard_release.json"] {
            let s: ScenarioConfig = load(&committed(name)).unwrap();
            s.brouwer.validate().unwrap();
        }
        let r: RegressConfig = load(&committed("regress_circle.json")).unwrap();
        assert_eq!(r.seeds, (0..10).collect::<Vec<_>>());
        let c: ContrastConfig = load(&committed("contrast.json")).unwrap();
        assert_eq!(c.seeds.len(), 10);
        let _: EvolveConfig = load(&committed("evolve_novelty.json")).unwrap();
        let _: CensusConfig = load(&committed("census2.json")).unwrap();
    }

    #[test]
    fn version_is_checked_before_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"schema_version": 2, "anything": true}"#).unwrap();
        let err = load::<ScenarioConfig>(&path).unwrap_err().to_string();
        assert!(err.contains("unsupported schema_version 2"), "{err}");
        std::fs::write(&path, r#"{"domain": {}}"#).unwrap();
        assert!(load::<ScenarioConfig>(&path).unwrap_err().to_string().contains("missing schema_version"));
    }

    #[test]
    fn seed_is_required() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(committed("maze.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("seed");
        std::fs::write(&path, v.to_string()).unwrap();
        assert!(load::<ScenarioConfig>(&path).is_err());
    }
}
