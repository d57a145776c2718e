use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor};
use crate::text::LabelVector;

fn log_sum_exp<T: Real>(logits: &[T]) -> T {
    let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
    if !m.is_finite() {
        return m;
    }
    m + logits.iter().map(|&l| (l - m).exp()).sum::<T>().ln()
}

/// `-log softmax(logits)[label]` for one example.
pub fn softmax_cross_entropy<T: Real>(logits: &[T], label: u8) -> Result<T> {
    let k = label as usize;
    if k >= logits.len() {
        return Err(Error::InvalidLabel(label as i64));
    }
    Ok(log_sum_exp(logits) - logits[k])
}

/// `softmax(logits) - one_hot(label)`.
pub fn softmax_cross_entropy_grad<T: Real>(logits: &[T], label: u8) -> Result<Vec<T>> {
    let k = label as usize;
    if k >= logits.len() {
        return Err(Error::InvalidLabel(label as i64));
    }
    let mut p = logits.to_vec();
    crate::tensor::softmax_in_place(&mut p);
    p[k] -= T::one();
    Ok(p)
}

/// Batch mean of `-sum_c t_c log softmax(logits)_c` for `logits: [B, C]`.
pub fn cross_entropy<T: Real>(logits: &Tensor<T>, targets: &[LabelVector]) -> Result<f64> {
    if logits.rank() != 2 || logits.rows() != targets.len() || logits.cols() != 2 {
        return Err(Error::shape("cross_entropy", logits.shape(), &[targets.len(), 2]));
    }
    if targets.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (i, t) in targets.iter().enumerate() {
        let row: Vec<f64> = logits.row(i).iter().map(|v| v.as_f64()).collect();
        let lse = log_sum_exp(&row);
        total -= t.0.iter().zip(&row).map(|(&tc, &l)| tc * (l - lse)).sum::<f64>();
    }
    Ok(total / targets.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::one_hot;

    #[test]
    fn uniform_logits_give_ln2() {
        let l = Tensor::matrix(1, 2, vec![0.0f64, 0.0]).unwrap();
        let v = cross_entropy(&l, &[one_hot(0).unwrap()]).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((softmax_cross_entropy(&[0.0f64, 0.0], 1).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn confident_logits_vanish() {
        assert!(softmax_cross_entropy(&[-50.0f64, 50.0], 1).unwrap() < 1e-40);
        let l = softmax_cross_entropy(&[1000.0f64, -1000.0], 1).unwrap();
        assert!((l - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn gradient_sums_to_zero() {
        let g = softmax_cross_entropy_grad(&[0.3f64, -1.2], 0).unwrap();
        assert!((g[0] + g[1]).abs() < 1e-15);
        assert!(g[0] < 0.0);
        assert!(softmax_cross_entropy_grad(&[0.0f64, 0.0], 2).is_err());
    }
}
