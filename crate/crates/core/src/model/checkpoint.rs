//! Model checkpoints: an NTC1 container of named tensors plus a JSON sidecar
//! with everything needed to rebuild the architecture.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ArchitectureSpec, HyperParams, InputDims, Model};
use crate::error::{Error, Result};
use crate::ntc::NamedTensors;
use crate::tensor::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub spec: ArchitectureSpec,
    pub hyperparams: HyperParams,
    pub dims: InputDims,
    pub seed: u64,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
}

pub fn sidecar_path(weights: &Path) -> PathBuf {
    weights.with_extension("json")
}

/// Writes `weights` and its `.json` sidecar.
pub fn save_checkpoint<T: Real>(model: &Model<T>, weights: &Path, metrics: &BTreeMap<String, f64>) -> Result<()> {
    let mut container = NamedTensors::new();
    for (name, _, t) in model.params.named() {
        container.insert_tensor(name, t)?;
    }
    container.write(weights)?;
    let meta = CheckpointMeta {
        spec: model.spec,
        hyperparams: model.hp.clone(),
        dims: model.dims,
        seed: model.seed,
        metrics: metrics.clone(),
    };
    let side = sidecar_path(weights);
    let json = serde_json::to_string_pretty(&meta)?;
    fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))
}

pub fn load_checkpoint<T: Real>(weights: &Path) -> Result<(Model<T>, CheckpointMeta)> {
    let side = sidecar_path(weights);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: CheckpointMeta = serde_json::from_str(&text)?;
    let container = NamedTensors::read(weights)?;
    let mut model = Model::<T>::zeros(meta.spec, &meta.hyperparams, meta.dims, meta.seed)?;
    let names: Vec<(String, Vec<usize>)> = model
        .params
        .named()
        .into_iter()
        .map(|(n, _, t)| (n, t.shape().to_vec()))
        .collect();
    if container.len() != names.len() {
        return Err(Error::format(
            "NTC1",
            format!("checkpoint has {} tensors, model needs {}", container.len(), names.len()),
        ));
    }
    for ((name, shape), slot) in names.iter().zip(model.params.tensors_mut()) {
        *slot = container.tensor(name, shape)?;
    }
    Ok((model, meta))
}
