use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Per-scalar first and second moments plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl<T: Real> Default for AdamState<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> AdamState<T> {
    pub fn new() -> Self {
        AdamState {
            m: Vec::new(),
            v: Vec::new(),
            t: 0,
            beta1: BETA1,
            beta2: BETA2,
            epsilon: EPSILON,
        }
    }
}

/// One Adam update. Moments are allocated on the first call.
///
/// ```text
/// t += 1
/// m = b1 m + (1 - b1) g
/// v = b2 v + (1 - b2) g^2
/// theta -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
/// ```
pub fn adam_step<T: Real>(
    params: &mut [&mut Tensor<T>],
    grads: &[&Tensor<T>],
    state: &mut AdamState<T>,
    lr: f64,
) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::shape("adam_step", &[params.len()], &[grads.len()]));
    }
    for (p, g) in params.iter().zip(grads) {
        if p.shape() != g.shape() {
            return Err(Error::shape("adam_step", p.shape(), g.shape()));
        }
    }
    if state.m.is_empty() {
        state.m = params.iter().map(|p| vec![T::zero(); p.len()]).collect();
        state.v = state.m.clone();
    } else if state.m.len() != params.len() || state.m.iter().zip(params.iter()).any(|(m, p)| m.len() != p.len()) {
        return Err(Error::Config("optimizer state does not match parameters".into()));
    }
    state.t += 1;
    let (b1, b2) = (T::lit(state.beta1), T::lit(state.beta2));
    let one = T::one();
    let c1 = one - T::lit(state.beta1.powi(state.t as i32));
    let c2 = one - T::lit(state.beta2.powi(state.t as i32));
    let eps = T::lit(state.epsilon);
    let lr = T::lit(lr);
    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let (m, v) = (&mut state.m[k], &mut state.v[k]);
        for (i, (theta, &gi)) in p.data_mut().iter_mut().zip(g.data()).enumerate() {
            m[i] = b1 * m[i] + (one - b1) * gi;
            v[i] = b2 * v[i] + (one - b2) * gi * gi;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            *theta -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_lr() {
        let mut theta = Tensor::vector(vec![0.5f64]);
        let g = Tensor::vector(vec![1.0]);
        let mut s = AdamState::new();
        adam_step(&mut [&mut theta], &[&g], &mut s, 1e-3).unwrap();
        let expected = 0.5 - 1e-3 / (1.0 + 1e-8);
        assert!((theta.data()[0] - expected).abs() < 1e-15);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut theta = Tensor::vector(vec![0.5f64, -3.0]);
        let g = Tensor::zeros(&[2]);
        let mut s = AdamState::new();
        for _ in 0..5 {
            adam_step(&mut [&mut theta], &[&g], &mut s, 1e-3).unwrap();
        }
        assert_eq!(theta.data(), &[0.5, -3.0]);
    }

    #[test]
    fn mismatched_shapes() {
        let mut theta = Tensor::vector(vec![0.5f64]);
        let g = Tensor::zeros(&[2]);
        assert!(adam_step(&mut [&mut theta], &[&g], &mut AdamState::new(), 1e-3).is_err());
    }
}
