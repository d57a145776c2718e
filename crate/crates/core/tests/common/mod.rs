//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's numerics: the recurrent cells, the
//! convolution, Adam, silhouette and the search baselines are written out
//! with plain loops so they can serve as oracles.

#![allow(dead_code)]

use hybridsent::layers::{GruParams, LstmParams};
use hybridsent::Tensor;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-4;
/// Denominator floor for relative errors, so entries that are zero on both
/// sides compare by absolute difference.
pub const FD_FLOOR: f64 = 1e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(n: usize, scale: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn uniform_tensor(shape: &[usize], scale: f64, rng: &mut impl Rng) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::new(shape, uniform_vec(n, scale, rng)).unwrap()
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `W x` with explicit loops over a row-major `[rows, cols]` tensor.
#[allow(clippy::needless_range_loop)]
fn mv(w: &Tensor<f64>, x: &[f64]) -> Vec<f64> {
    let (rows, cols) = (w.shape()[0], w.shape()[1]);
    let mut out = vec![0.0; rows];
    for r in 0..rows {
        for c in 0..cols {
            out[r] += w.data()[r * cols + c] * x[c];
        }
    }
    out
}

/// Literal LSTM cell:
/// f = σ(W_fx x + W_fh h + b_f), i = σ(W_ix x + W_ih h + b_i),
/// C̃ = tanh(W_cx x + W_ch h + b_c), C = f C_prev + i C̃,
/// o = σ(W_ox x + W_oh h + b_o), h = o tanh(C).
pub fn lstm_reference(x: &[f64], h: &[f64], c: &[f64], p: &LstmParams<f64>) -> (Vec<f64>, Vec<f64>) {
    let u = h.len();
    let (fx, fh) = (mv(&p.w_fx, x), mv(&p.w_fh, h));
    let (ix, ih) = (mv(&p.w_ix, x), mv(&p.w_ih, h));
    let (cx, ch) = (mv(&p.w_cx, x), mv(&p.w_ch, h));
    let (ox, oh) = (mv(&p.w_ox, x), mv(&p.w_oh, h));
    let mut h_new = vec![0.0; u];
    let mut c_new = vec![0.0; u];
    for k in 0..u {
        let f = sig(fx[k] + fh[k] + p.b_f.data()[k]);
        let i = sig(ix[k] + ih[k] + p.b_i.data()[k]);
        let cand = (cx[k] + ch[k] + p.b_c.data()[k]).tanh();
        c_new[k] = f * c[k] + i * cand;
        let o = sig(ox[k] + oh[k] + p.b_o.data()[k]);
        h_new[k] = o * c_new[k].tanh();
    }
    (h_new, c_new)
}

/// Literal GRU cell:
/// z = σ(W_zx x + W_zh h + b_z), r = σ(W_rx x + W_rh h + b_r),
/// h̃ = tanh(W_hx x + r ⊙ (W_hh h) + b_h), h' = z h + (1 - z) h̃.
pub fn gru_reference(x: &[f64], h: &[f64], p: &GruParams<f64>) -> Vec<f64> {
    let u = h.len();
    let (zx, zh) = (mv(&p.w_zx, x), mv(&p.w_zh, h));
    let (rx, rh) = (mv(&p.w_rx, x), mv(&p.w_rh, h));
    let (hx, hh) = (mv(&p.w_hx, x), mv(&p.w_hh, h));
    let mut out = vec![0.0; u];
    for k in 0..u {
        let z = sig(zx[k] + zh[k] + p.b_z.data()[k]);
        let r = sig(rx[k] + rh[k] + p.b_r.data()[k]);
        let cand = (hx[k] + r * hh[k] + p.b_h.data()[k]).tanh();
        out[k] = z * h[k] + (1.0 - z) * cand;
    }
    out
}

/// `c[i][f] = relu(b[f] + Σ_k Σ_j w[f][k][j] x[i + k][j])` accumulated in
/// the same `(k, j)` order as a flattened window dot product.
pub fn conv_reference(x: &Tensor<f64>, w: &Tensor<f64>, b: &Tensor<f64>) -> Vec<Vec<f64>> {
    let (t, d) = (x.shape()[0], x.shape()[1]);
    let (l, h) = (w.shape()[0], w.shape()[1]);
    let mut out = vec![vec![0.0; l]; t - h + 1];
    for (i, row) in out.iter_mut().enumerate() {
        for (f, cell) in row.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in 0..h {
                for j in 0..d {
                    s += x.data()[(i + k) * d + j] * w.data()[(f * h + k) * d + j];
                }
            }
            *cell = (s + b.data()[f]).max(0.0);
        }
    }
    out
}

/// Central differences of `loss` with respect to every scalar of the tensors
/// returned by `select`.
pub fn numeric_gradients<P>(
    params: &mut P,
    select: impl Fn(&mut P) -> Vec<&mut Tensor<f64>>,
    loss: impl Fn(&P) -> f64,
) -> Vec<Vec<f64>> {
    let sizes: Vec<usize> = select(params).iter().map(|t| t.len()).collect();
    let mut out = Vec::with_capacity(sizes.len());
    for (k, &n) in sizes.iter().enumerate() {
        let mut g = vec![0.0; n];
        for (i, gi) in g.iter_mut().enumerate() {
            let orig = select(params)[k].data()[i];
            select(params)[k].data_mut()[i] = orig + FD_STEP;
            let plus = loss(params);
            select(params)[k].data_mut()[i] = orig - FD_STEP;
            let minus = loss(params);
            select(params)[k].data_mut()[i] = orig;
            *gi = (plus - minus) / (2.0 * FD_STEP);
        }
        out.push(g);
    }
    out
}

pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(FD_FLOOR)
}

/// Largest relative error over all entries.
pub fn max_relative_error(analytic: &[Vec<f64>], numeric: &[Vec<f64>]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .flat_map(|(a, n)| {
            assert_eq!(a.len(), n.len());
            a.iter().zip(n).map(|(&x, &y)| relative_error(x, y))
        })
        .fold(0.0, f64::max)
}

pub fn to_vecs(ts: &[&Tensor<f64>]) -> Vec<Vec<f64>> {
    ts.iter().map(|t| t.data().to_vec()).collect()
}

/// Adam on `θ²` written out for a single scalar.
pub fn adam_scalar_trajectory(theta0: f64, lr: f64, steps: usize) -> Vec<f64> {
    let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8f64);
    let (mut theta, mut m, mut v) = (theta0, 0.0, 0.0);
    let mut out = Vec::with_capacity(steps);
    for t in 1..=steps {
        let g = 2.0 * theta;
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        let m_hat = m / (1.0 - b1.powi(t as i32));
        let v_hat = v / (1.0 - b2.powi(t as i32));
        theta -= lr * m_hat / (v_hat.sqrt() + eps);
        out.push(theta);
    }
    out
}

/// Mean silhouette coefficient under Euclidean distance.
pub fn silhouette(points: &[[f64; 2]], labels: &[u8]) -> f64 {
    let n = points.len();
    let dist = |a: &[f64; 2], b: &[f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let mut total = 0.0;
    for i in 0..n {
        let (mut same, mut n_same, mut other, mut n_other) = (0.0, 0usize, 0.0, 0usize);
        for j in 0..n {
            if i == j {
                continue;
            }
            if labels[j] == labels[i] {
                same += dist(&points[i], &points[j]);
                n_same += 1;
            } else {
                other += dist(&points[i], &points[j]);
                n_other += 1;
            }
        }
        if n_same == 0 || n_other == 0 {
            continue;
        }
        let a = same / n_same as f64;
        let b = other / n_other as f64;
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

/// Two Gaussian blobs in `dim` dimensions, centers `±offset` on every axis.
pub fn two_blobs(n: usize, dim: usize, offset: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
    use rand_distr::{Distribution, StandardNormal};
    let mut r = rng(seed);
    let mut pts = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = (i % 2) as u8;
        let c = if label == 1 { offset } else { -offset };
        pts.push(
            (0..dim)
                .map(|_| {
                    let e: f64 = StandardNormal.sample(&mut r);
                    c + e
                })
                .collect::<Vec<f64>>(),
        );
        labels.push(label);
    }
    (pts, labels)
}

/// Seeded objective over the unit cube: a sum of two anisotropic bumps plus
/// a gentle ripple, so the landscape has a global and a local optimum.
#[derive(Debug, Clone)]
pub struct GridObjective {
    centers: [Vec<f64>; 2],
    heights: [f64; 2],
    widths: Vec<f64>,
    ripple: Vec<f64>,
}

impl GridObjective {
    pub fn new(dim: usize, seed: u64) -> Self {
        let mut r = rng(seed);
        let mut point = || (0..dim).map(|_| r.random_range(0.0..1.0)).collect::<Vec<f64>>();
        let centers = [point(), point()];
        let widths = (0..dim).map(|_| r.random_range(0.3..0.8)).collect();
        let ripple = (0..dim).map(|_| r.random_range(1.0..4.0)).collect();
        GridObjective {
            centers,
            heights: [1.0, r.random_range(0.4..0.8)],
            widths,
            ripple,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let bump = |c: &[f64], h: f64| {
            let d2: f64 = x
                .iter()
                .zip(c)
                .zip(&self.widths)
                .map(|((a, b), w)| ((a - b) / w).powi(2))
                .sum();
            h * (-0.5 * d2).exp()
        };
        let ripple: f64 = x.iter().zip(&self.ripple).map(|(a, f)| (f * a).sin()).sum::<f64>();
        bump(&self.centers[0], self.heights[0]) + bump(&self.centers[1], self.heights[1]) + 0.02 * ripple / x.len() as f64
    }
}

/// Best of `trials` distinct uniformly drawn grid points.
pub fn random_search_best(scores: &[f64], trials: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    sample(&mut r, scores.len(), trials.min(scores.len()))
        .into_iter()
        .map(|i| scores[i])
        .fold(f64::NEG_INFINITY, f64::max)
}
