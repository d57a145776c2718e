//! Resolved run configuration, snapshotted into every output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hpo::{Objective, DEFAULT_MAX_TRIALS};
use crate::model::{Architecture, HyperParams, Representation};
use crate::train::TrainConfig;

pub const SNAPSHOT_FILE: &str = "run_config.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub representation: Representation,
    pub architecture: Option<Architecture>,
    pub hyperparams: HyperParams,
    /// Use the region-size candidates exactly as printed (`{4, 5}`).
    pub region_sizes_as_printed: bool,
    pub split_ratio: f64,
    pub split_seed: u64,
    pub train: TrainConfig,
    pub hpo_trials: usize,
    pub hpo_objective: Objective,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            representation: Representation::BertFeatures,
            architecture: None,
            hyperparams: HyperParams::default(),
            region_sizes_as_printed: false,
            split_ratio: 0.8,
            split_seed: 42,
            train: TrainConfig::default(),
            hpo_trials: DEFAULT_MAX_TRIALS,
            hpo_objective: Objective::ValAccuracy,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Writes `run_config.json` into `dir`.
    pub fn write_snapshot(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(SNAPSHOT_FILE);
        fs::write(&path, self.to_json()?).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!("split ratio {} must lie in (0, 1)", self.split_ratio)));
        }
        if self.hpo_trials == 0 {
            return Err(Error::Config("hpo_trials must be positive".into()));
        }
        self.hyperparams.validate()?;
        self.train.validate()
    }
}
