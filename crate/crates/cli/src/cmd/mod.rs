pub mod eval;
pub mod features;
pub mod hpo;
pub mod preprocess;
pub mod train;
pub mod tsne;

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use hybridsent::config::RunConfig;
use hybridsent::model::HyperParams;
use hybridsent::{Error, Exec};

use crate::opts::ProtocolArgs;

pub fn exec(sequential: bool) -> Exec {
    if sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(Error::from)
        .with_context(|| format!("parsing {}", path.display()))
}

/// The `--config` file, or defaults, with every given flag applied on top.
pub fn resolve_config(p: &ProtocolArgs) -> Result<RunConfig> {
    let mut cfg = match &p.config {
        Some(path) => RunConfig::from_json_file(path).with_context(|| format!("loading {}", path.display()))?,
        None => RunConfig::default(),
    };
    if let Some(hp) = &p.hp {
        cfg.hyperparams = read_json::<HyperParams>(hp)?;
    }
    let t = &mut cfg.train;
    t.seed = p.seed.unwrap_or(t.seed);
    t.epochs = p.epochs.unwrap_or(t.epochs);
    t.batch_size = p.batch_size.unwrap_or(t.batch_size);
    t.learning_rate = p.lr.unwrap_or(t.learning_rate);
    t.patience = p.patience.unwrap_or(t.patience);
    t.repetitions = p.reps.unwrap_or(t.repetitions);
    t.val_fraction = p.val_fraction.unwrap_or(t.val_fraction);
    cfg.split_seed = p.split_seed.unwrap_or(cfg.split_seed);
    cfg.split_ratio = p.split_ratio.unwrap_or(cfg.split_ratio);
    cfg.validate()?;
    Ok(cfg)
}

/// Directory name for an architecture, e.g. `cnn-lstm`.
pub fn slug(label: &str) -> String {
    label.to_ascii_lowercase()
}
