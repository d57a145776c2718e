use rand::Rng;

use super::{init, ParamKind, ParamSet};
use crate::error::{Error, Result};
use crate::tensor::{dot, Activation, Real, Tensor};

/// Filter bank `weight: [filters, region, input_dim]` and one bias per filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1dParams<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Real> Conv1dParams<T> {
    pub fn zeros(filters: usize, region: usize, input_dim: usize) -> Self {
        Conv1dParams {
            weight: Tensor::zeros(&[filters, region, input_dim]),
            bias: Tensor::zeros(&[filters]),
        }
    }

    pub fn init(filters: usize, region: usize, input_dim: usize, rng: &mut impl Rng) -> Self {
        let fan_in = region * input_dim;
        let fan_out = region * filters;
        Conv1dParams {
            weight: init::glorot_uniform(&[filters, region, input_dim], fan_in, fan_out, rng),
            bias: Tensor::zeros(&[filters]),
        }
    }

    pub fn filters(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn region(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn input_dim(&self) -> usize {
        self.weight.shape()[2]
    }
}

impl<T: Real> ParamSet<T> for Conv1dParams<T> {
    fn named(&self) -> Vec<(&'static str, ParamKind, &Tensor<T>)> {
        vec![
            ("weight", ParamKind::ConvKernel, &self.weight),
            ("bias", ParamKind::Bias, &self.bias),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor<T>> {
        vec![&mut self.weight, &mut self.bias]
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.filters(), self.region(), self.input_dim())
    }
}

#[derive(Debug, Clone)]
pub struct Conv1dCache<T> {
    input: Tensor<T>,
    pre: Tensor<T>,
    out: Tensor<T>,
    act: Activation,
}

/// Valid 1-D convolution over time. Output row `i`, column `f` is
/// `act(sum_k sum_j x[i+k, j] * w[f, k, j] + b[f])`; `T - h + 1` rows.
pub fn conv1d_forward<T: Real>(
    x: &Tensor<T>,
    p: &Conv1dParams<T>,
    act: Activation,
) -> Result<(Tensor<T>, Conv1dCache<T>)> {
    let (l, h, d) = (p.filters(), p.region(), p.input_dim());
    if x.rank() != 2 || x.cols() != d {
        return Err(Error::shape("conv1d", x.shape(), p.weight.shape()));
    }
    let t = x.rows();
    if t < h {
        return Err(Error::SequenceTooShort { len: t, required: h });
    }
    let n = t - h + 1;
    let window = h * d;
    let mut pre = Tensor::zeros(&[n, l]);
    for i in 0..n {
        let xs = &x.data()[i * d..i * d + window];
        let row = pre.row_mut(i);
        for (f, r) in row.iter_mut().enumerate() {
            let wf = &p.weight.data()[f * window..(f + 1) * window];
            *r = dot(xs, wf) + p.bias.data()[f];
        }
    }
    let out = pre.map(act);
    Ok((
        out.clone(),
        Conv1dCache {
            input: x.clone(),
            pre,
            out,
            act,
        },
    ))
}

/// Returns the input gradient and adds parameter gradients into `grads`.
pub fn conv1d_backward<T: Real>(
    p: &Conv1dParams<T>,
    cache: &Conv1dCache<T>,
    dy: &Tensor<T>,
    grads: &mut Conv1dParams<T>,
) -> Result<Tensor<T>> {
    if dy.shape() != cache.out.shape() {
        return Err(Error::shape("conv1d_backward", dy.shape(), cache.out.shape()));
    }
    let (l, h, d) = (p.filters(), p.region(), p.input_dim());
    let window = h * d;
    let n = cache.out.rows();
    let mut dx = Tensor::zeros(cache.input.shape());
    for i in 0..n {
        let xs = &cache.input.data()[i * d..i * d + window];
        for f in 0..l {
            let idx = i * l + f;
            let g = dy.data()[idx]
                * cache
                    .act
                    .derivative(cache.pre.data()[idx], cache.out.data()[idx]);
            if g == T::zero() {
                continue;
            }
            grads.bias.data_mut()[f] += g;
            let gw = &mut grads.weight.data_mut()[f * window..(f + 1) * window];
            for (gw, &xv) in gw.iter_mut().zip(xs) {
                *gw += g * xv;
            }
            let wf = &p.weight.data()[f * window..(f + 1) * window];
            let dxs = &mut dx.data_mut()[i * d..i * d + window];
            for (dv, &wv) in dxs.iter_mut().zip(wf) {
                *dv += g * wv;
            }
        }
    }
    Ok(dx)
}
