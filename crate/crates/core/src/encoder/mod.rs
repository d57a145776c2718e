//! Forward-only transformer encoder used as a frozen feature extractor.
//!
//! Each layer is post-norm: `LN(x + MHA(x))` followed by
//! `LN(y + FFN(y))` with a GELU feed-forward block. Padded keys receive an
//! additive `-1e9` bias before the attention softmax.

mod config;
mod features;
mod weights;

pub use config::EncoderConfig;
pub use features::{extract_features, FeatureCache, FeatureMatrix, FeatureRecord, MAGIC as FEATURE_CACHE_MAGIC};
pub use weights::{weight_slots, EncoderLayerWeights, EncoderWeights};

use crate::error::{Error, Result};
use crate::tensor::{softmax_in_place, Activation, Real, Tensor};
use crate::text::TokenizedExample;

pub const MASK_BIAS: f64 = -1e9;

/// Token + segment + position embeddings followed by the embedding
/// layer norm. Output is `[len, hidden]`.
pub fn embed_input<T: Real>(
    ex: &TokenizedExample,
    w: &EncoderWeights<T>,
    cfg: &EncoderConfig,
) -> Result<Tensor<T>> {
    let len = ex.ids.len();
    if len > cfg.max_positions {
        return Err(Error::Config(format!(
            "sequence length {len} exceeds max_positions {}",
            cfg.max_positions
        )));
    }
    let h = cfg.hidden;
    let mut x = Tensor::zeros(&[len, h]);
    for pos in 0..len {
        let id = ex.ids[pos] as usize;
        if id >= cfg.vocab_size {
            return Err(Error::TokenOutOfRange {
                id,
                size: cfg.vocab_size,
            });
        }
        let seg = ex.segment_ids.get(pos).copied().unwrap_or(0) as usize;
        if seg >= cfg.type_vocab {
            return Err(Error::TokenOutOfRange {
                id: seg,
                size: cfg.type_vocab,
            });
        }
        let row = x.row_mut(pos);
        let (tok, sg, ps) = (w.word.row(id), w.segment.row(seg), w.position.row(pos));
        for j in 0..h {
            row[j] = tok[j] + sg[j] + ps[j];
        }
    }
    x.layer_norm(&w.emb_ln_gamma, &w.emb_ln_beta, T::lit(cfg.ln_eps))
}

fn linear<T: Real>(x: &Tensor<T>, weight: &Tensor<T>, bias: &Tensor<T>) -> Result<Tensor<T>> {
    let mut y = x.matmul_t(weight)?;
    y.add_row_vector(bias.data())?;
    Ok(y)
}

/// Multi-head scaled dot-product self-attention.
///
/// Returns the concatenated per-head context `[len, hidden]` (before the
/// output projection) and one `[len, len]` probability matrix per head.
pub fn self_attention<T: Real>(
    x: &Tensor<T>,
    mask: &[u8],
    lw: &EncoderLayerWeights<T>,
    cfg: &EncoderConfig,
) -> Result<(Tensor<T>, Vec<Tensor<T>>)> {
    let len = x.rows();
    if mask.len() != len {
        return Err(Error::shape("self_attention", x.shape(), &[mask.len()]));
    }
    let q = linear(x, &lw.q_weight, &lw.q_bias)?;
    let k = linear(x, &lw.k_weight, &lw.k_bias)?;
    let v = linear(x, &lw.v_weight, &lw.v_bias)?;
    let dh = cfg.head_dim();
    let scale = T::one() / T::lit(dh as f64).sqrt();
    let bias = T::lit(MASK_BIAS);

    let mut context = Tensor::zeros(&[len, cfg.hidden]);
    let mut probs = Vec::with_capacity(cfg.num_heads);
    for head in 0..cfg.num_heads {
        let cols = head * dh..(head + 1) * dh;
        let mut p = Tensor::zeros(&[len, len]);
        for i in 0..len {
            let qi = &q.row(i)[cols.clone()];
            let row = p.row_mut(i);
            for j in 0..len {
                let kj = &k.row(j)[cols.clone()];
                let mut s = crate::tensor::dot(qi, kj) * scale;
                if mask[j] == 0 {
                    s += bias;
                }
                row[j] = s;
            }
            softmax_in_place(row);
        }
        for i in 0..len {
            let prow = p.row(i).to_vec();
            let crow = &mut context.row_mut(i)[cols.clone()];
            for (j, &pij) in prow.iter().enumerate() {
                let vj = &v.row(j)[cols.clone()];
                for (c, &vv) in crow.iter_mut().zip(vj) {
                    *c += pij * vv;
                }
            }
        }
        probs.push(p);
    }
    Ok((context, probs))
}

/// One encoder block, also returning the per-head attention probabilities.
pub fn encoder_layer_traced<T: Real>(
    x: &Tensor<T>,
    mask: &[u8],
    lw: &EncoderLayerWeights<T>,
    cfg: &EncoderConfig,
) -> Result<(Tensor<T>, Vec<Tensor<T>>)> {
    let eps = T::lit(cfg.ln_eps);
    let (context, probs) = self_attention(x, mask, lw, cfg)?;
    let mut attn = linear(&context, &lw.out_weight, &lw.out_bias)?;
    attn.add_assign(x)?;
    let y = attn.layer_norm(&lw.attn_ln_gamma, &lw.attn_ln_beta, eps)?;

    let inner = linear(&y, &lw.ffn_in_weight, &lw.ffn_in_bias)?.map(Activation::Gelu);
    let mut ffn = linear(&inner, &lw.ffn_out_weight, &lw.ffn_out_bias)?;
    ffn.add_assign(&y)?;
    Ok((ffn.layer_norm(&lw.ffn_ln_gamma, &lw.ffn_ln_beta, eps)?, probs))
}

pub fn encoder_layer<T: Real>(
    x: &Tensor<T>,
    mask: &[u8],
    lw: &EncoderLayerWeights<T>,
    cfg: &EncoderConfig,
) -> Result<Tensor<T>> {
    encoder_layer_traced(x, mask, lw, cfg).map(|(out, _)| out)
}

/// A loaded, immutable encoder.
#[derive(Debug, Clone)]
pub struct Encoder<T> {
    pub config: EncoderConfig,
    pub weights: EncoderWeights<T>,
}

impl<T: Real> Encoder<T> {
    pub fn new(config: EncoderConfig, weights: EncoderWeights<T>) -> Result<Self> {
        config.validate()?;
        if weights.layers.len() != config.num_layers || weights.word.shape() != [config.vocab_size, config.hidden] {
            return Err(Error::Config("encoder weights do not match config".into()));
        }
        Ok(Encoder { config, weights })
    }

    /// Final-layer hidden states for every position. Pad rows are kept and
    /// flagged through the returned mask.
    pub fn encode(&self, ex: &TokenizedExample) -> Result<FeatureMatrix<T>> {
        let mut x = embed_input(ex, &self.weights, &self.config)?;
        for lw in &self.weights.layers {
            x = encoder_layer(&x, &ex.attention_mask, lw, &self.config)?;
        }
        Ok(FeatureMatrix {
            data: x,
            mask: ex.attention_mask.clone(),
        })
    }
}
