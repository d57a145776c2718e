use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor};

/// Source row of every pooled value. Ties resolve to the lowest row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolCache {
    argmax: Vec<usize>,
    input_shape: Vec<usize>,
}

impl PoolCache {
    pub fn argmax(&self) -> &[usize] {
        &self.argmax
    }
}

/// Max over time per column: `[n, l] -> [l]`.
pub fn maxpool_global<T: Real>(c: &Tensor<T>) -> Result<(Tensor<T>, PoolCache)> {
    let (n, l) = (c.rows(), c.cols());
    if c.rank() != 2 || n == 0 {
        return Err(Error::EmptyInput("maxpool_global"));
    }
    let mut out = c.row(0).to_vec();
    let mut argmax = vec![0usize; l];
    for i in 1..n {
        for (f, &v) in c.row(i).iter().enumerate() {
            if v > out[f] {
                out[f] = v;
                argmax[f] = i;
            }
        }
    }
    Ok((
        Tensor::vector(out),
        PoolCache {
            argmax,
            input_shape: c.shape().to_vec(),
        },
    ))
}

pub fn maxpool_global_backward<T: Real>(cache: &PoolCache, dy: &[T]) -> Tensor<T> {
    let mut dx = Tensor::zeros(&cache.input_shape);
    let l = cache.argmax.len();
    for (f, (&row, &g)) in cache.argmax.iter().zip(dy).enumerate() {
        dx.data_mut()[row * l + f] += g;
    }
    dx
}

/// Non-overlapping windowed max over time: `[n, l] -> [(n - window) / stride + 1, l]`.
/// Rows past the last full window are dropped.
pub fn maxpool_local<T: Real>(c: &Tensor<T>, window: usize, stride: usize) -> Result<(Tensor<T>, PoolCache)> {
    let (n, l) = (c.rows(), c.cols());
    if window == 0 || stride == 0 {
        return Err(Error::Parameter("pool window and stride must be positive".into()));
    }
    if c.rank() != 2 || n < window {
        return Err(Error::SequenceTooShort {
            len: n,
            required: window,
        });
    }
    let m = (n - window) / stride + 1;
    let mut out = Tensor::zeros(&[m, l]);
    let mut argmax = vec![0usize; m * l];
    for o in 0..m {
        let start = o * stride;
        for f in 0..l {
            let mut best = start;
            for i in start + 1..start + window {
                if c.data()[i * l + f] > c.data()[best * l + f] {
                    best = i;
                }
            }
            out.data_mut()[o * l + f] = c.data()[best * l + f];
            argmax[o * l + f] = best;
        }
    }
    Ok((
        out,
        PoolCache {
            argmax,
            input_shape: c.shape().to_vec(),
        },
    ))
}

pub fn maxpool_local_backward<T: Real>(cache: &PoolCache, dy: &Tensor<T>) -> Tensor<T> {
    let mut dx = Tensor::zeros(&cache.input_shape);
    let l = cache.input_shape[1];
    for (idx, (&row, &g)) in cache.argmax.iter().zip(dy.data()).enumerate() {
        dx.data_mut()[row * l + idx % l] += g;
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_cases() {
        let c = Tensor::matrix(2, 1, vec![3.0f64, 5.0]).unwrap();
        let (y, cache) = maxpool_global(&c).unwrap();
        assert_eq!(y.data(), &[5.0]);
        assert_eq!(cache.argmax(), &[1]);

        let c = Tensor::matrix(3, 1, vec![2.0f64, 2.0, 2.0]).unwrap();
        let (y, cache) = maxpool_global(&c).unwrap();
        assert_eq!((y.data()[0], cache.argmax()[0]), (2.0, 0));

        let c = Tensor::matrix(1, 3, vec![1.0f64, -2.0, 3.0]).unwrap();
        assert_eq!(maxpool_global(&c).unwrap().0.data(), c.data());

        assert!(maxpool_global(&Tensor::<f64>::zeros(&[0, 2])).is_err());
    }

    #[test]
    fn global_backward_routes_to_argmax() {
        let c = Tensor::matrix(3, 2, vec![1.0f64, 9.0, 4.0, 2.0, 0.0, 3.0]).unwrap();
        let (_, cache) = maxpool_global(&c).unwrap();
        let dx = maxpool_global_backward(&cache, &[10.0, 20.0]);
        assert_eq!(dx.data(), &[0.0, 20.0, 10.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn local_cases() {
        let c = Tensor::matrix(4, 1, vec![1.0f64, 4.0, 2.0, 3.0]).unwrap();
        assert_eq!(maxpool_local(&c, 2, 2).unwrap().0.data(), &[4.0, 3.0]);
        let c = Tensor::matrix(5, 1, vec![1.0f64, 4.0, 2.0, 3.0, 99.0]).unwrap();
        assert_eq!(maxpool_local(&c, 2, 2).unwrap().0.shape(), &[2, 1]);
        assert!(maxpool_local(&Tensor::<f64>::zeros(&[1, 3]), 2, 2).is_err());
    }

    #[test]
    fn local_matches_brute_force() {
        let c = Tensor::from_fn(&[11, 3], |i| ((i * 7919) % 31) as f64);
        let (y, _) = maxpool_local(&c, 2, 2).unwrap();
        for o in 0..5 {
            for f in 0..3 {
                let want = (2 * o..2 * o + 2)
                    .map(|i| c.data()[i * 3 + f])
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(y.data()[o * 3 + f], want);
            }
        }
    }
}
