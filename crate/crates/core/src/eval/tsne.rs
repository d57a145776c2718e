//! Exact t-SNE with per-point perplexity calibration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Exec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    /// Iterations run with exaggerated affinities and the initial momentum.
    pub exaggeration_iters: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub min_gain: f64,
    /// Allowed calibration error in bits.
    pub entropy_tolerance: f64,
    pub max_search_steps: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            min_gain: 0.01,
            entropy_tolerance: 1e-5,
            max_search_steps: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneResult {
    pub coords: Vec<[f64; 2]>,
    /// `KL(P || Q)` at the random initial layout.
    pub initial_kl: f64,
    pub final_kl: f64,
    /// `|H(P_i) - log2(perplexity)|` in bits, per point.
    pub entropy_errors: Vec<f64>,
}

/// Row-major `n x n` squared Euclidean distances.
pub fn squared_distances(points: &[Vec<f64>], exec: Exec) -> Vec<f64> {
    let n = points.len();
    let mut d = vec![0.0; n * n];
    exec.for_each_row(&mut d, n.max(1), |i, row| {
        for (j, out) in row.iter_mut().enumerate() {
            *out = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
        }
    });
    d
}

/// Conditional distribution `P(j | i)` for precision `beta` and its entropy in
/// bits. `row` holds squared distances from `i`; entry `i` is skipped.
fn conditional_row(row: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    // Shifting by the nearest distance cancels in the normalization and keeps
    // the exponentials from underflowing.
    let d_min = row
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (j, (o, &d)) in out.iter_mut().zip(row).enumerate() {
        *o = if j == i { 0.0 } else { (-beta * (d - d_min)).exp() };
        sum += *o;
    }
    let mut weighted = 0.0;
    for (j, o) in out.iter_mut().enumerate() {
        *o /= sum;
        if j != i {
            weighted += *o * (row[j] - d_min);
        }
    }
    (sum.ln() + beta * weighted) / std::f64::consts::LN_2
}

/// Calibrated conditional affinities (row-major, rows sum to 1) and the
/// entropy error of each row.
pub fn conditional_affinities(dist: &[f64], n: usize, cfg: &TsneConfig, exec: Exec) -> (Vec<f64>, Vec<f64>) {
    let target = cfg.perplexity.log2();
    let rows = exec.map_range(n, |i| {
        let row = &dist[i * n..(i + 1) * n];
        let mut p = vec![0.0; n];
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let mut beta = 1.0;
        let mut h = conditional_row(row, i, beta, &mut p);
        for _ in 0..cfg.max_search_steps {
            if (h - target).abs() < cfg.entropy_tolerance {
                break;
            }
            if h > target {
                lo = beta;
                beta = if hi.is_finite() { 0.5 * (lo + hi) } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = 0.5 * (lo + hi);
            }
            h = conditional_row(row, i, beta, &mut p);
        }
        (p, (h - target).abs())
    });
    let mut p = Vec::with_capacity(n * n);
    let mut errors = Vec::with_capacity(n);
    for (row, e) in rows {
        p.extend(row);
        errors.push(e);
    }
    (p, errors)
}

/// `(P + P^T) / (2n)`.
pub fn joint_affinities(conditional: &[f64], n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n * n];
    let scale = 1.0 / (2.0 * n as f64);
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = (conditional[i * n + j] + conditional[j * n + i]) * scale;
        }
    }
    p
}

/// Student-t kernel `1 / (1 + |y_i - y_j|^2)` with a zero diagonal.
fn kernel(y: &[[f64; 2]], exec: Exec) -> Vec<f64> {
    let n = y.len();
    let mut num = vec![0.0; n * n];
    exec.for_each_row(&mut num, n.max(1), |i, row| {
        for (j, out) in row.iter_mut().enumerate() {
            if j != i {
                let dx = y[i][0] - y[j][0];
                let dy = y[i][1] - y[j][1];
                *out = 1.0 / (1.0 + dx * dx + dy * dy);
            }
        }
    });
    num
}

fn kl_divergence(p: &[f64], num: &[f64]) -> f64 {
    let z: f64 = num.iter().sum();
    p.iter()
        .zip(num)
        .filter(|(&pij, _)| pij > 0.0)
        .map(|(&pij, &nij)| pij * (pij / (nij / z).max(f64::MIN_POSITIVE)).ln())
        .sum()
}

/// Embeds `points` (`n` rows of equal length `D >= 2`) into two dimensions.
pub fn tsne(points: &[Vec<f64>], cfg: &TsneConfig, exec: Exec) -> Result<TsneResult> {
    let n = points.len();
    let dim = points.first().map_or(0, Vec::len);
    if dim < 2 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::Parameter(format!(
            "t-SNE needs rows of equal dimension >= 2, got {dim}"
        )));
    }
    if cfg.perplexity.is_nan() || cfg.perplexity <= 0.0 || 3.0 * cfg.perplexity >= n as f64 {
        return Err(Error::Parameter(format!(
            "perplexity {} is infeasible for {n} points (need 3 * perplexity < n)",
            cfg.perplexity
        )));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("t-SNE input contains non-finite values".into()));
    }

    let dist = squared_distances(points, exec);
    let (cond, entropy_errors) = conditional_affinities(&dist, n, cfg, exec);
    let p = joint_affinities(&cond, n);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)])
        .collect();
    let initial_kl = kl_divergence(&p, &kernel(&y, exec));

    let mut update = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    for iter in 0..cfg.iterations {
        let early = iter < cfg.exaggeration_iters;
        let exaggeration = if early { cfg.early_exaggeration } else { 1.0 };
        let momentum = if early { cfg.initial_momentum } else { cfg.final_momentum };
        let num = kernel(&y, exec);
        let z: f64 = num.iter().sum();
        let grad = exec.map_range(n, |i| {
            let mut g = [0.0; 2];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let nij = num[i * n + j];
                let w = (exaggeration * p[i * n + j] - nij / z) * nij;
                g[0] += w * (y[i][0] - y[j][0]);
                g[1] += w * (y[i][1] - y[j][1]);
            }
            [4.0 * g[0], 4.0 * g[1]]
        });
        for i in 0..n {
            for k in 0..2 {
                let same_sign = (grad[i][k] > 0.0) == (update[i][k] > 0.0);
                gains[i][k] = if same_sign { gains[i][k] * 0.8 } else { gains[i][k] + 0.2 };
                gains[i][k] = gains[i][k].max(cfg.min_gain);
                update[i][k] = momentum * update[i][k] - cfg.learning_rate * gains[i][k] * grad[i][k];
                y[i][k] += update[i][k];
            }
        }
        let mean = y.iter().fold([0.0, 0.0], |m, v| [m[0] + v[0], m[1] + v[1]]);
        let (mx, my) = (mean[0] / n as f64, mean[1] / n as f64);
        y.iter_mut().for_each(|v| {
            v[0] -= mx;
            v[1] -= my;
        });
    }
    let final_kl = kl_divergence(&p, &kernel(&y, exec));
    if !final_kl.is_finite() || y.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("t-SNE optimization diverged".into()));
    }
    Ok(TsneResult {
        coords: y,
        initial_kl,
        final_kl,
        entropy_errors,
    })
}
