//! Gaussian-process surrogate with a fixed RBF kernel and the expected
//! improvement acquisition.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    pub signal_std: f64,
    pub length_scale: f64,
    pub noise_std: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            signal_std: 1.0,
            length_scale: 0.5,
            noise_std: 1e-4,
        }
    }
}

impl GpConfig {
    /// `sf^2 exp(-|a - b|^2 / (2 l^2))`
    pub fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        self.signal_std.powi(2) * (-d2 / (2.0 * self.length_scale.powi(2))).exp()
    }
}

/// Lower-triangular Cholesky factor (row-major) of a symmetric matrix,
/// retrying with growing diagonal jitter.
pub fn cholesky_with_jitter(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max).max(1.0);
    for jitter in [0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4] {
        if let Some(l) = cholesky(a, n, jitter * scale) {
            return Ok(l);
        }
    }
    Err(Error::Numeric("kernel matrix is not positive definite after jitter".into()))
}

fn cholesky(a: &[f64], n: usize, jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            if i == j {
                s += jitter;
            }
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !s.is_finite() || s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solves `L x = b` for lower-triangular `L`.
fn forward_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[i * n + k] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    x
}

/// Solves `L^T x = b`.
fn backward_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= l[k * n + i] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    x
}

/// A fitted posterior. Scores are standardized internally when there are at
/// least two observations; predictions are reported in the original units.
#[derive(Debug, Clone)]
pub struct GaussianProcess {
    cfg: GpConfig,
    x: Vec<Vec<f64>>,
    chol: Vec<f64>,
    alpha: Vec<f64>,
    y_mean: f64,
    y_scale: f64,
}

impl GaussianProcess {
    pub fn fit(x: &[Vec<f64>], y: &[f64], cfg: GpConfig) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::shape("gp_posterior", &[x.len()], &[y.len()]));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite score in surrogate data".into()));
        }
        let n = x.len();
        let (y_mean, y_scale) = if n >= 2 {
            let m = y.iter().sum::<f64>() / n as f64;
            let var = y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            let s = var.sqrt();
            (m, if s > 0.0 { s } else { 1.0 })
        } else {
            (0.0, 1.0)
        };
        let ys: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_scale).collect();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                k[i * n + j] = cfg.kernel(&x[i], &x[j]);
            }
            k[i * n + i] += cfg.noise_std.powi(2);
        }
        let chol = cholesky_with_jitter(&k, n)?;
        let alpha = backward_solve(&chol, n, &forward_solve(&chol, n, &ys));
        Ok(GaussianProcess {
            cfg,
            x: x.to_vec(),
            chol,
            alpha,
            y_mean,
            y_scale,
        })
    }

    /// Posterior mean and variance of the latent function at `q`.
    pub fn predict(&self, q: &[f64]) -> (f64, f64) {
        let n = self.x.len();
        let prior = self.cfg.kernel(q, q);
        if n == 0 {
            return (self.y_mean, prior * self.y_scale.powi(2));
        }
        let ks: Vec<f64> = self.x.iter().map(|xi| self.cfg.kernel(xi, q)).collect();
        let mean: f64 = ks.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = forward_solve(&self.chol, n, &ks);
        let var = (prior - v.iter().map(|x| x * x).sum::<f64>()).max(0.0);
        (self.y_mean + self.y_scale * mean, var * self.y_scale.powi(2))
    }
}

pub fn gp_posterior(x: &[Vec<f64>], y: &[f64], query: &[f64], cfg: GpConfig) -> Result<(f64, f64)> {
    Ok(GaussianProcess::fit(x, y, cfg)?.predict(query))
}

/// Maximization-form expected improvement over `best`.
pub fn expected_improvement(mean: f64, var: f64, best: f64) -> f64 {
    let sigma = var.max(0.0).sqrt();
    let diff = mean - best;
    if sigma <= 0.0 || !sigma.is_finite() {
        return diff.max(0.0);
    }
    let z = diff / sigma;
    let n = Normal::standard();
    (diff * n.cdf(z) + sigma * n.pdf(z)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_without_data() {
        let (m, v) = gp_posterior(&[], &[], &[0.3, 0.1], GpConfig::default()).unwrap();
        assert_eq!((m, v), (0.0, 1.0));
    }

    #[test]
    fn interpolates_observations() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![0.5, 1.0]];
        let y = [0.2, 0.9, 0.4];
        let gp = GaussianProcess::fit(&x, &y, GpConfig::default()).unwrap();
        for (xi, &yi) in x.iter().zip(&y) {
            let (m, v) = gp.predict(xi);
            assert!((m - yi).abs() < 1e-6, "{m} vs {yi}");
            assert!(v <= 1.0);
        }
    }

    #[test]
    fn ei_spot_values() {
        assert!((expected_improvement(0.0, 1.0, 0.0) - 0.398_942_280_401_432_7).abs() < 1e-12);
        assert_eq!(expected_improvement(-1.0, 0.0, 0.0), 0.0);
        assert_eq!(expected_improvement(2.0, 0.0, 0.5), 1.5);
        let mut last = 0.0;
        for k in 1..20 {
            let ei = expected_improvement(0.0, (k as f64 * 0.1).powi(2), 0.0);
            assert!(ei > last);
            last = ei;
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0];
        assert!(cholesky_with_jitter(&a, 2).is_err());
    }
}
