//! Encoder parameter slots and their names inside an `NTC1` container.
//!
//! Linear weights are stored `[out, in]` so that a layer computes
//! `x W^T + b`:
//!
//! | name                               | shape                  |
//! |------------------------------------|------------------------|
//! | `embeddings.word.weight`           | `[vocab_size, H]`      |
//! | `embeddings.position.weight`       | `[max_positions, H]`   |
//! | `embeddings.segment.weight`        | `[type_vocab, H]`      |
//! | `embeddings.ln.gamma` / `.beta`    | `[H]`                  |
//! | `layer.{i}.attn.{q,k,v,out}.weight`| `[H, H]`               |
//! | `layer.{i}.attn.{q,k,v,out}.bias`  | `[H]`                  |
//! | `layer.{i}.attn.ln.gamma` / `.beta`| `[H]`                  |
//! | `layer.{i}.ffn.in.weight`          | `[intermediate, H]`    |
//! | `layer.{i}.ffn.in.bias`            | `[intermediate]`       |
//! | `layer.{i}.ffn.out.weight`         | `[H, intermediate]`    |
//! | `layer.{i}.ffn.out.bias`           | `[H]`                  |
//! | `layer.{i}.ffn.ln.gamma` / `.beta` | `[H]`                  |
//!
//! `i` runs from 0 to `num_layers - 1`. Any exporter that writes these names
//! and shapes (for example from a Hugging Face BERT checkpoint, mapping
//! `attention.self.query` to `attn.q` and so on) produces a loadable file.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::EncoderConfig;
use crate::error::Result;
use crate::ntc::NamedTensors;
use crate::tensor::{Real, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderLayerWeights<T> {
    pub q_weight: Tensor<T>,
    pub q_bias: Tensor<T>,
    pub k_weight: Tensor<T>,
    pub k_bias: Tensor<T>,
    pub v_weight: Tensor<T>,
    pub v_bias: Tensor<T>,
    pub out_weight: Tensor<T>,
    pub out_bias: Tensor<T>,
    pub attn_ln_gamma: Tensor<T>,
    pub attn_ln_beta: Tensor<T>,
    pub ffn_in_weight: Tensor<T>,
    pub ffn_in_bias: Tensor<T>,
    pub ffn_out_weight: Tensor<T>,
    pub ffn_out_bias: Tensor<T>,
    pub ffn_ln_gamma: Tensor<T>,
    pub ffn_ln_beta: Tensor<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderWeights<T> {
    pub word: Tensor<T>,
    pub position: Tensor<T>,
    pub segment: Tensor<T>,
    pub emb_ln_gamma: Tensor<T>,
    pub emb_ln_beta: Tensor<T>,
    pub layers: Vec<EncoderLayerWeights<T>>,
}

/// Every `(name, shape)` slot a config requires, in container order.
pub fn weight_slots(cfg: &EncoderConfig) -> Vec<(String, Vec<usize>)> {
    let h = cfg.hidden;
    let mut slots = vec![
        ("embeddings.word.weight".to_string(), vec![cfg.vocab_size, h]),
        ("embeddings.position.weight".to_string(), vec![cfg.max_positions, h]),
        ("embeddings.segment.weight".to_string(), vec![cfg.type_vocab, h]),
        ("embeddings.ln.gamma".to_string(), vec![h]),
        ("embeddings.ln.beta".to_string(), vec![h]),
    ];
    for i in 0..cfg.num_layers {
        let p = format!("layer.{i}");
        for proj in ["q", "k", "v", "out"] {
            slots.push((format!("{p}.attn.{proj}.weight"), vec![h, h]));
            slots.push((format!("{p}.attn.{proj}.bias"), vec![h]));
        }
        slots.push((format!("{p}.attn.ln.gamma"), vec![h]));
        slots.push((format!("{p}.attn.ln.beta"), vec![h]));
        slots.push((format!("{p}.ffn.in.weight"), vec![cfg.intermediate, h]));
        slots.push((format!("{p}.ffn.in.bias"), vec![cfg.intermediate]));
        slots.push((format!("{p}.ffn.out.weight"), vec![h, cfg.intermediate]));
        slots.push((format!("{p}.ffn.out.bias"), vec![h]));
        slots.push((format!("{p}.ffn.ln.gamma"), vec![h]));
        slots.push((format!("{p}.ffn.ln.beta"), vec![h]));
    }
    slots
}

impl<T: Real> EncoderWeights<T> {
    /// Builds weights from a container, failing on the first missing or
    /// misshapen slot.
    pub fn from_container(c: &NamedTensors, cfg: &EncoderConfig) -> Result<Self> {
        cfg.validate()?;
        let mut slots = weight_slots(cfg).into_iter();
        let mut next = || -> Result<Tensor<T>> {
            let (name, shape) = slots.next().expect("slot order matches struct layout");
            c.tensor(&name, &shape)
        };
        let word = next()?;
        let position = next()?;
        let segment = next()?;
        let emb_ln_gamma = next()?;
        let emb_ln_beta = next()?;
        let mut layers = Vec::with_capacity(cfg.num_layers);
        for _ in 0..cfg.num_layers {
            layers.push(EncoderLayerWeights {
                q_weight: next()?,
                q_bias: next()?,
                k_weight: next()?,
                k_bias: next()?,
                v_weight: next()?,
                v_bias: next()?,
                out_weight: next()?,
                out_bias: next()?,
                attn_ln_gamma: next()?,
                attn_ln_beta: next()?,
                ffn_in_weight: next()?,
                ffn_in_bias: next()?,
                ffn_out_weight: next()?,
                ffn_out_bias: next()?,
                ffn_ln_gamma: next()?,
                ffn_ln_beta: next()?,
            });
        }
        Ok(EncoderWeights {
            word,
            position,
            segment,
            emb_ln_gamma,
            emb_ln_beta,
            layers,
        })
    }

    fn tensors(&self) -> Vec<&Tensor<T>> {
        let mut v = vec![
            &self.word,
            &self.position,
            &self.segment,
            &self.emb_ln_gamma,
            &self.emb_ln_beta,
        ];
        for l in &self.layers {
            v.extend([
                &l.q_weight,
                &l.q_bias,
                &l.k_weight,
                &l.k_bias,
                &l.v_weight,
                &l.v_bias,
                &l.out_weight,
                &l.out_bias,
                &l.attn_ln_gamma,
                &l.attn_ln_beta,
                &l.ffn_in_weight,
                &l.ffn_in_bias,
                &l.ffn_out_weight,
                &l.ffn_out_bias,
                &l.ffn_ln_gamma,
                &l.ffn_ln_beta,
            ]);
        }
        v
    }

    pub fn to_container(&self, cfg: &EncoderConfig) -> Result<NamedTensors> {
        let mut c = NamedTensors::new();
        for ((name, _), t) in weight_slots(cfg).into_iter().zip(self.tensors()) {
            c.insert_tensor(name, t)?;
        }
        Ok(c)
    }

    /// Random weights with N(0, 0.02) matrices, zero biases and unit
    /// layer-norm gains. Only meant for tests and demos.
    pub fn random(cfg: &EncoderConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0f64, 0.02).expect("valid std");
        let mut c = NamedTensors::new();
        for (name, shape) in weight_slots(cfg) {
            let n: usize = shape.iter().product();
            let data = if name.ends_with(".gamma") {
                vec![1.0f32; n]
            } else if name.ends_with(".bias") || name.ends_with(".beta") {
                vec![0.0f32; n]
            } else {
                (0..n).map(|_| normal.sample(&mut rng) as f32).collect()
            };
            c.insert(name, shape, data)?;
        }
        Self::from_container(&c, cfg)
    }

    /// Every tensor zero except layer-norm gains, which are one.
    pub fn zeros(cfg: &EncoderConfig) -> Result<Self> {
        let mut c = NamedTensors::new();
        for (name, shape) in weight_slots(cfg) {
            let n: usize = shape.iter().product();
            let fill = if name.ends_with(".gamma") { 1.0 } else { 0.0 };
            c.insert(name, shape, vec![fill; n])?;
        }
        Self::from_container(&c, cfg)
    }
}
