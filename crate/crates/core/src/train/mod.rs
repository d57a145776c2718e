//! Mini-batch training with Adam, early stopping on validation loss and
//! repeated seeded runs.

mod adam;
mod loss;

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{confusion, metrics, ConfusionCounts, RunMetrics};
use crate::model::{build_model, ArchitectureSpec, HyperParams, InputDims, Model, Sample};
use crate::par::Exec;
use crate::tensor::Real;

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use loss::{cross_entropy, softmax_cross_entropy, softmax_cross_entropy_grad};

/// Smallest dataset `split_dataset` accepts.
pub const MIN_DATASET: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub patience: usize,
    /// Share of the training portion held out for early stopping.
    pub val_fraction: f64,
    pub seed: u64,
    pub repetitions: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 32,
            learning_rate: 1e-3,
            patience: 5,
            val_fraction: 0.1,
            seed: 42,
            repetitions: 5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.repetitions == 0 {
            return Err(Error::Config("epochs, batch size and repetitions must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::Config(format!("val_fraction {} must lie in [0, 1)", self.val_fraction)));
        }
        Ok(())
    }
}

/// Size of the first part when splitting `n` items at `ratio`: `ceil(ratio * n)`.
pub fn split_point(n: usize, ratio: f64) -> usize {
    // The small slack keeps products such as 0.8 * 10 from rounding up to 9.
    ((ratio * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Seeded shuffle of `0..n` split at `ceil(ratio * n)`.
pub fn split_indices(n: usize, ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < MIN_DATASET {
        return Err(Error::DatasetTooSmall { len: n, min: MIN_DATASET });
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio {ratio} must lie in (0, 1)")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = split_point(n, ratio);
    let second = idx.split_off(cut);
    Ok((idx, second))
}

/// Moves `data` into a seeded `(train, test)` split.
pub fn split_dataset<S>(data: Vec<S>, ratio: f64, seed: u64) -> Result<(Vec<S>, Vec<S>)> {
    let (a, b) = split_indices(data.len(), ratio, seed)?;
    let mut slots: Vec<Option<S>> = data.into_iter().map(Some).collect();
    let mut take = |ids: Vec<usize>| -> Vec<S> {
        ids.into_iter()
            .map(|i| slots[i].take().expect("split indices are a permutation"))
            .collect()
    };
    let train = take(a);
    let test = take(b);
    Ok((train, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Continue,
    Stop,
}

/// Patience rule on a monitored loss. Epochs are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    epoch: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            epoch: 0,
        }
    }

    pub fn observe(&mut self, loss: f64) -> StopDecision {
        self.epoch += 1;
        if loss < self.best {
            self.best = loss;
            self.best_epoch = self.epoch;
            StopDecision::Improved
        } else if self.epoch - self.best_epoch >= self.patience {
            StopDecision::Stop
        } else {
            StopDecision::Continue
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_loss(&self) -> f64 {
        self.best
    }

    pub fn epochs_seen(&self) -> usize {
        self.epoch
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stop_epoch: usize,
    pub stopped_early: bool,
}

impl TrainHistory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss,val_acc\n");
        for r in &self.epochs {
            let _ = writeln!(out, "{},{},{},{}", r.epoch, r.train_loss, r.val_loss, r.val_acc);
        }
        out
    }

    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.iter().find(|r| r.epoch == self.best_epoch)
    }
}

/// Number of validation examples carved from `n` training examples.
pub fn validation_size(n: usize, fraction: f64) -> usize {
    if fraction <= 0.0 {
        return 0;
    }
    ((fraction * n as f64).floor() as usize).max(1)
}

/// Trains `model` on `data` and returns it with the best-validation-loss
/// parameters restored.
///
/// A `val_fraction` share of `data` is held out for monitoring. With no
/// held-out data the training loss is monitored instead.
pub fn train<T: Real>(
    mut model: Model<T>,
    data: &[Sample<T>],
    cfg: &TrainConfig,
    exec: Exec,
) -> Result<(Model<T>, TrainHistory)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput("train"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let n_val = validation_size(data.len(), cfg.val_fraction);
    if n_val >= data.len() {
        return Err(Error::DatasetTooSmall {
            len: data.len(),
            min: n_val + 1,
        });
    }
    let mut train_idx = order.split_off(n_val);
    let val: Vec<Sample<T>> = order.iter().map(|&i| data[i].clone()).collect();

    let mut adam = AdamState::<T>::new();
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best_params = model.params.clone();
    let mut records = Vec::new();
    let mut stopped_early = false;

    for epoch in 1..=cfg.epochs {
        train_idx.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch_ids in train_idx.chunks(cfg.batch_size) {
            let batch: Vec<&Sample<T>> = batch_ids.iter().map(|&i| &data[i]).collect();
            let (ce, mut grads) = model.batch_gradients(&batch, exec)?;
            let loss = ce + model.l2_penalty();
            if !loss.is_finite() || !grads.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    loss: loss.as_f64(),
                });
            }
            model.add_l2_grad(&mut grads);
            let grad_refs = grads.tensors();
            adam_step(&mut model.params.tensors_mut(), &grad_refs, &mut adam, cfg.learning_rate)?;
            loss_sum += loss.as_f64() * batch.len() as f64;
        }
        let train_loss = loss_sum / train_idx.len() as f64;

        let (val_loss, val_acc) = if val.is_empty() {
            (train_loss, f64::NAN)
        } else {
            let (ce, acc) = model.evaluate(&val, exec)?;
            ((ce + model.l2_penalty()).as_f64(), acc)
        };
        if !val_loss.is_finite() {
            return Err(Error::Divergence { epoch, loss: val_loss });
        }
        records.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_acc,
        });
        match stopper.observe(val_loss) {
            StopDecision::Improved => best_params = model.params.clone(),
            StopDecision::Continue => {}
            StopDecision::Stop => {
                stopped_early = true;
                break;
            }
        }
    }
    model.params = best_params;
    let history = TrainHistory {
        stop_epoch: records.len(),
        epochs: records,
        best_epoch: stopper.best_epoch(),
        stopped_early,
    };
    Ok((model, history))
}

#[derive(Debug, Clone)]
pub struct Repetition<T> {
    pub seed: u64,
    pub model: Model<T>,
    pub history: TrainHistory,
    pub confusion: ConfusionCounts,
    pub metrics: RunMetrics,
}

/// Seed of repetition `i`: `base + i`.
pub fn repetition_seed(base: u64, i: usize) -> u64 {
    base.wrapping_add(i as u64)
}

/// Trains `cfg.repetitions` models on a fixed split, differing only in the
/// seed used for initialization and shuffling, and scores each on `test`.
#[allow(clippy::too_many_arguments)]
pub fn run_repetitions<T: Real>(
    spec: ArchitectureSpec,
    hp: &HyperParams,
    dims: InputDims,
    train_set: &[Sample<T>],
    test_set: &[Sample<T>],
    cfg: &TrainConfig,
    exec: Exec,
    mut on_done: impl FnMut(usize, &Repetition<T>),
) -> Result<Vec<Repetition<T>>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.repetitions);
    for i in 0..cfg.repetitions {
        let seed = repetition_seed(cfg.seed, i);
        let model = build_model::<T>(spec, hp, dims, seed)?;
        let run_cfg = TrainConfig { seed, ..cfg.clone() };
        let (model, history) = train(model, train_set, &run_cfg, exec)?;
        let inputs: Vec<_> = test_set.iter().map(|s| &s.input).collect();
        let preds = model.predict(&inputs, exec)?;
        let labels: Vec<u8> = test_set.iter().map(|s| s.label).collect();
        let counts = confusion(&preds, &labels)?;
        let rep = Repetition {
            seed,
            model,
            history,
            confusion: counts,
            metrics: metrics(&counts)?,
        };
        on_done(i, &rep);
        out.push(rep);
    }
    Ok(out)
}
