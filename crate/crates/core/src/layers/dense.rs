use rand::Rng;

use super::{init, matvec_acc, matvec_t_acc, outer_acc, add_acc, ParamKind, ParamSet};
use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor};

/// Fully connected layer, `weight: [out, in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Real> DenseParams<T> {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        DenseParams {
            weight: Tensor::zeros(&[out_dim, in_dim]),
            bias: Tensor::zeros(&[out_dim]),
        }
    }

    pub fn init(out_dim: usize, in_dim: usize, rng: &mut impl Rng) -> Self {
        DenseParams {
            weight: init::glorot_uniform(&[out_dim, in_dim], in_dim, out_dim, rng),
            bias: Tensor::zeros(&[out_dim]),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn in_dim(&self) -> usize {
        self.weight.shape()[1]
    }
}

impl<T: Real> ParamSet<T> for DenseParams<T> {
    fn named(&self) -> Vec<(&'static str, ParamKind, &Tensor<T>)> {
        vec![
            ("weight", ParamKind::DenseKernel, &self.weight),
            ("bias", ParamKind::Bias, &self.bias),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor<T>> {
        vec![&mut self.weight, &mut self.bias]
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.out_dim(), self.in_dim())
    }
}

/// `W x + b`.
pub fn dense_forward<T: Real>(x: &[T], p: &DenseParams<T>) -> Result<Vec<T>> {
    if x.len() != p.in_dim() {
        return Err(Error::shape("dense", &[x.len()], p.weight.shape()));
    }
    let mut y = p.bias.data().to_vec();
    matvec_acc(&p.weight, x, &mut y);
    Ok(y)
}

/// Returns `dx` and adds `dW = dy x^T`, `db = dy` into `grads`.
pub fn dense_backward<T: Real>(p: &DenseParams<T>, x: &[T], dy: &[T], grads: &mut DenseParams<T>) -> Vec<T> {
    outer_acc(&mut grads.weight, dy, x);
    add_acc(grads.bias.data_mut(), dy);
    let mut dx = vec![T::zero(); x.len()];
    matvec_t_acc(&p.weight, dy, &mut dx);
    dx
}
