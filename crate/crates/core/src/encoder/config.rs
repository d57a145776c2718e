use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub num_layers: usize,
    pub hidden: usize,
    pub num_heads: usize,
    pub intermediate: usize,
    pub vocab_size: usize,
    pub max_positions: usize,
    #[serde(default = "default_type_vocab")]
    pub type_vocab: usize,
    #[serde(default = "default_ln_eps")]
    pub ln_eps: f64,
}

fn default_type_vocab() -> usize {
    2
}

fn default_ln_eps() -> f64 {
    1e-12
}

impl EncoderConfig {
    /// BERT-base geometry: 12 layers, hidden 768, 12 heads, FFN 3072,
    /// 30,522-token vocabulary, 512 positions.
    pub fn reference() -> Self {
        EncoderConfig {
            num_layers: 12,
            hidden: 768,
            num_heads: 12,
            intermediate: 3072,
            vocab_size: 30522,
            max_positions: 512,
            type_vocab: 2,
            ln_eps: 1e-12,
        }
    }

    /// Small geometry for tests and demos.
    pub fn toy(vocab_size: usize) -> Self {
        EncoderConfig {
            num_layers: 2,
            hidden: 16,
            num_heads: 2,
            intermediate: 32,
            vocab_size,
            max_positions: 128,
            type_vocab: 2,
            ln_eps: 1e-12,
        }
    }

    pub fn head_dim(&self) -> usize {
        self.hidden / self.num_heads
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("num_layers", self.num_layers),
            ("hidden", self.hidden),
            ("num_heads", self.num_heads),
            ("intermediate", self.intermediate),
            ("vocab_size", self.vocab_size),
            ("max_positions", self.max_positions),
            ("type_vocab", self.type_vocab),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("encoder {name} must be positive")));
            }
        }
        if !self.hidden.is_multiple_of(self.num_heads) {
            return Err(Error::Config(format!(
                "hidden size {} is not divisible by {} heads",
                self.hidden, self.num_heads
            )));
        }
        if self.ln_eps <= 0.0 {
            return Err(Error::Config("ln_eps must be positive".into()));
        }
        Ok(())
    }
}
