//! Trainable layers with hand-written backward passes.
//!
//! Every parameter struct doubles as its own gradient accumulator: backward
//! functions add into a value of the same type created with
//! [`ParamSet::zeros_like`].

mod conv;
mod dense;
mod embedding;
pub mod init;
mod pool;
mod rnn;

use serde::{Deserialize, Serialize};

use crate::tensor::{Real, Tensor};

pub use conv::{conv1d_backward, conv1d_forward, Conv1dCache, Conv1dParams};
pub use dense::{dense_backward, dense_forward, DenseParams};
pub use embedding::{embedding_backward, embedding_lookup, EmbeddingTable};
pub use pool::{
    maxpool_global, maxpool_global_backward, maxpool_local, maxpool_local_backward, PoolCache,
};
pub use rnn::{
    gru_step, lstm_step, rnn_backward, rnn_forward, GruParams, LstmParams, RnnCache, RnnKind,
    RnnParams,
};

/// Which regularization group a tensor belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamKind {
    ConvKernel,
    /// Input-to-hidden recurrent matrices (`W_*x`).
    InputKernel,
    /// Hidden-to-hidden recurrent matrices (`W_*h`).
    RecurrentKernel,
    DenseKernel,
    Bias,
    Embedding,
}

pub trait ParamSet<T: Real>: Sized {
    /// Tensors in a fixed order with their local names and kinds.
    fn named(&self) -> Vec<(&'static str, ParamKind, &Tensor<T>)>;

    fn tensors_mut(&mut self) -> Vec<&mut Tensor<T>>;

    fn zeros_like(&self) -> Self;

    fn tensors(&self) -> Vec<&Tensor<T>> {
        self.named().into_iter().map(|(_, _, t)| t).collect()
    }
}

/// `out += W x` for `W: [rows, cols]`.
#[inline]
pub(crate) fn matvec_acc<T: Real>(w: &Tensor<T>, x: &[T], out: &mut [T]) {
    let c = w.cols();
    for (o, row) in out.iter_mut().zip(w.data().chunks_exact(c)) {
        *o += crate::tensor::dot(row, x);
    }
}

/// `out += W^T y` for `W: [rows, cols]`.
#[inline]
pub(crate) fn matvec_t_acc<T: Real>(w: &Tensor<T>, y: &[T], out: &mut [T]) {
    let c = w.cols();
    for (&yi, row) in y.iter().zip(w.data().chunks_exact(c)) {
        if yi == T::zero() {
            continue;
        }
        for (o, &wv) in out.iter_mut().zip(row) {
            *o += yi * wv;
        }
    }
}

/// `g += a b^T`.
#[inline]
pub(crate) fn outer_acc<T: Real>(g: &mut Tensor<T>, a: &[T], b: &[T]) {
    let c = g.cols();
    for (&ai, row) in a.iter().zip(g.data_mut().chunks_exact_mut(c)) {
        if ai == T::zero() {
            continue;
        }
        for (r, &bv) in row.iter_mut().zip(b) {
            *r += ai * bv;
        }
    }
}

#[inline]
pub(crate) fn add_acc<T: Real>(g: &mut [T], a: &[T]) {
    for (x, &y) in g.iter_mut().zip(a) {
        *x += y;
    }
}
