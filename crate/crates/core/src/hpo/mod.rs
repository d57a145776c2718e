//! Bayesian optimization over a discrete hyperparameter grid.

mod gp;
mod space;

use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_model, ArchitectureSpec, HyperParams, InputDims, Sample};
use crate::par::Exec;
use crate::tensor::Real;
use crate::train::{train, TrainConfig};

pub use gp::{cholesky_with_jitter, expected_improvement, gp_posterior, GaussianProcess, GpConfig};
pub use space::{
    Dimension, SearchSpace, CNN_L2, DENSE_L2, EMBEDDING_SIZE, KERNEL_L2, NUM_FILTERS, RECURRENT_L2,
    REGION_SIZE, RNN_UNITS,
};

/// Trials drawn uniformly before the surrogate takes over.
pub const RANDOM_TRIALS: usize = 3;
pub const DEFAULT_MAX_TRIALS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub grid_index: usize,
    pub config: HyperParams,
    /// Present only for completed trials.
    pub score: Option<f64>,
    pub seed: u64,
    pub status: TrialStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Next grid index to evaluate.
///
/// The first [`RANDOM_TRIALS`] suggestions (and any made before a trial has
/// completed) are uniform over unexplored points; after that the unexplored
/// point with the highest expected improvement wins, ties going to the lowest
/// grid index.
pub fn suggest(history: &[Trial], space: &SearchSpace, gp: GpConfig, rng: &mut impl Rng) -> Result<usize> {
    let tried: HashSet<usize> = history.iter().map(|t| t.grid_index).collect();
    let open: Vec<usize> = (0..space.size()).filter(|i| !tried.contains(i)).collect();
    if open.is_empty() {
        return Err(Error::SpaceExhausted);
    }
    let done: Vec<&Trial> = history
        .iter()
        .filter(|t| t.status == TrialStatus::Completed)
        .collect();
    if history.len() < RANDOM_TRIALS || done.is_empty() {
        return Ok(open[rng.random_range(0..open.len())]);
    }
    let x: Vec<Vec<f64>> = done
        .iter()
        .map(|t| Ok(space.encode_point(&space.point(t.grid_index)?)))
        .collect::<Result<_>>()?;
    let y: Vec<f64> = done.iter().map(|t| t.score.unwrap_or(f64::NAN)).collect();
    let best = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let model = GaussianProcess::fit(&x, &y, gp)?;
    let mut arg = open[0];
    let mut top = f64::NEG_INFINITY;
    for &i in &open {
        let (m, v) = model.predict(&space.encode_point(&space.point(i)?));
        let ei = expected_improvement(m, v, best);
        if ei > top {
            top = ei;
            arg = i;
        }
    }
    Ok(arg)
}

/// RNG for trial `index`: one ChaCha stream per trial so a resumed search
/// makes the same suggestions as an uninterrupted one.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn read_ledger(path: &Path) -> Result<Vec<Trial>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn append_ledger(path: &Path, trial: &Trial) -> Result<()> {
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let line = serde_json::to_string(trial)?;
    writeln!(f, "{line}").map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HpoOutcome {
    pub trials: Vec<Trial>,
    pub best: Trial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HpoSettings {
    pub max_trials: usize,
    /// Drives suggestions only.
    pub search_seed: u64,
    /// Handed to every objective call.
    pub train_seed: u64,
    pub gp: GpConfig,
}

impl Default for HpoSettings {
    fn default() -> Self {
        HpoSettings {
            max_trials: DEFAULT_MAX_TRIALS,
            search_seed: 0,
            train_seed: 42,
            gp: GpConfig::default(),
        }
    }
}

/// Runs up to `max_trials` trials and returns the best-scoring one.
///
/// Objective failures are recorded as failed trials. With a `ledger` path
/// every trial is appended as one JSON line and trials already present are
/// reused, so an interrupted search can be resumed.
pub fn optimize(
    space: &SearchSpace,
    mut objective: impl FnMut(&HyperParams, u64) -> Result<f64>,
    settings: &HpoSettings,
    ledger: Option<&Path>,
) -> Result<HpoOutcome> {
    let mut trials = match ledger {
        Some(p) => read_ledger(p)?,
        None => Vec::new(),
    };
    for (i, t) in trials.iter().enumerate() {
        if t.index != i || space.config_at(t.grid_index)? != t.config {
            return Err(Error::Config(format!(
                "ledger entry {i} does not belong to this search space"
            )));
        }
    }
    while trials.len() < settings.max_trials {
        let index = trials.len();
        let mut rng = trial_rng(settings.search_seed, index);
        let grid_index = match suggest(&trials, space, settings.gp, &mut rng) {
            Ok(i) => i,
            Err(Error::SpaceExhausted) => break,
            Err(e) => return Err(e),
        };
        let config = space.config_at(grid_index)?;
        let result = objective(&config, settings.train_seed).and_then(|s| {
            if s.is_finite() {
                Ok(s)
            } else {
                Err(Error::Numeric(format!("objective returned {s}")))
            }
        });
        let trial = match result {
            Ok(score) => Trial {
                index,
                grid_index,
                config,
                score: Some(score),
                seed: settings.train_seed,
                status: TrialStatus::Completed,
                error: None,
            },
            Err(e) => Trial {
                index,
                grid_index,
                config,
                score: None,
                seed: settings.train_seed,
                status: TrialStatus::Failed,
                error: Some(e.to_string()),
            },
        };
        if let Some(p) = ledger {
            append_ledger(p, &trial)?;
        }
        trials.push(trial);
    }
    let best = trials
        .iter()
        .filter(|t| t.status == TrialStatus::Completed)
        .fold(None::<&Trial>, |acc, t| match acc {
            Some(b) if b.score >= t.score => Some(b),
            _ => Some(t),
        })
        .cloned()
        .ok_or_else(|| Error::Numeric("every trial failed".into()))?;
    Ok(HpoOutcome { trials, best })
}

/// What a trial's training run is scored on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Validation accuracy at the restored epoch.
    #[default]
    ValAccuracy,
    /// Negated validation loss at the restored epoch.
    ValLoss,
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "val-accuracy" | "accuracy" => Ok(Objective::ValAccuracy),
            "val-loss" | "loss" => Ok(Objective::ValLoss),
            _ => Err(Error::Config(format!("unknown objective {s:?}"))),
        }
    }
}

/// Trains one model with `hp` and scores its best epoch.
pub fn training_objective<T: Real>(
    spec: ArchitectureSpec,
    hp: &HyperParams,
    dims: InputDims,
    data: &[Sample<T>],
    cfg: &TrainConfig,
    objective: Objective,
    exec: Exec,
) -> Result<f64> {
    let model = build_model::<T>(spec, hp, dims, cfg.seed)?;
    let (_, history) = train(model, data, cfg, exec)?;
    let best = history
        .best()
        .ok_or_else(|| Error::Numeric("training recorded no epochs".into()))?;
    Ok(match objective {
        Objective::ValAccuracy => best.val_acc,
        Objective::ValLoss => -best.val_loss,
    })
}
