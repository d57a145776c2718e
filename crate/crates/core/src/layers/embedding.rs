use rand::Rng;

use super::{add_acc, init, ParamKind, ParamSet};
use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor};

/// Trainable `[vocab, dim]` lookup table.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    pub table: Tensor<T>,
}

impl<T: Real> EmbeddingTable<T> {
    pub fn zeros(vocab: usize, dim: usize) -> Self {
        EmbeddingTable {
            table: Tensor::zeros(&[vocab, dim]),
        }
    }

    /// `U(-0.05, 0.05)`.
    pub fn init(vocab: usize, dim: usize, rng: &mut impl Rng) -> Self {
        EmbeddingTable {
            table: init::uniform(&[vocab, dim], 0.05, rng),
        }
    }

    pub fn vocab(&self) -> usize {
        self.table.shape()[0]
    }

    pub fn dim(&self) -> usize {
        self.table.shape()[1]
    }
}

impl<T: Real> ParamSet<T> for EmbeddingTable<T> {
    fn named(&self) -> Vec<(&'static str, ParamKind, &Tensor<T>)> {
        vec![("table", ParamKind::Embedding, &self.table)]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor<T>> {
        vec![&mut self.table]
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.vocab(), self.dim())
    }
}

/// Row gather. The pad id is an ordinary trainable row.
pub fn embedding_lookup<T: Real>(ids: &[u32], table: &EmbeddingTable<T>) -> Result<Tensor<T>> {
    let dim = table.dim();
    let mut out = Vec::with_capacity(ids.len() * dim);
    for &id in ids {
        let id = id as usize;
        if id >= table.vocab() {
            return Err(Error::TokenOutOfRange {
                id,
                size: table.vocab(),
            });
        }
        out.extend_from_slice(table.table.row(id));
    }
    Tensor::new(&[ids.len(), dim], out)
}

pub fn embedding_backward<T: Real>(ids: &[u32], dy: &Tensor<T>, grads: &mut EmbeddingTable<T>) {
    for (t, &id) in ids.iter().enumerate() {
        add_acc(grads.table.row_mut(id as usize), dy.row(t));
    }
}
