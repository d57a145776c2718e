//! Seeded parameter initializers.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::tensor::{Real, Tensor};

/// Glorot/Xavier uniform: `U(-a, a)` with `a = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<T: Real>(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Tensor<T> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    uniform(shape, a, rng)
}

pub fn uniform<T: Real>(shape: &[usize], limit: f64, rng: &mut impl Rng) -> Tensor<T> {
    let dist = Uniform::new_inclusive(-limit, limit).expect("valid range");
    Tensor::from_fn(shape, |_| T::lit(dist.sample(rng)))
}

/// Random `n x n` orthogonal matrix: modified Gram-Schmidt on a Gaussian
/// matrix, rows as the orthonormal basis.
pub fn orthogonal<T: Real>(n: usize, rng: &mut impl Rng) -> Tensor<T> {
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    for i in 0..n {
        let (done, rest) = m.split_at_mut(i);
        let row = &mut rest[0];
        for basis in done.iter() {
            let proj: f64 = row.iter().zip(basis).map(|(a, b)| a * b).sum();
            row.iter_mut().zip(basis).for_each(|(a, b)| *a -= proj * b);
        }
        let norm = m[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            // Degenerate draw; fall back to the matching basis vector.
            m[i] = (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect();
        } else {
            m[i].iter_mut().for_each(|v| *v /= norm);
        }
    }
    Tensor::from_fn(&[n, n], |idx| T::lit(m[idx / n][idx % n]))
}
