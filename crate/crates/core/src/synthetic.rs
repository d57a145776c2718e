//! Seeded synthetic feature datasets for smoke tests, benches and demos.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::encoder::FeatureMatrix;
use crate::model::{ModelInput, Sample};
use crate::tensor::{Real, Tensor};

/// Two classes whose active rows carry a class-specific direction `±a u` on a
/// random half of the positions, over unit Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    pub examples: usize,
    pub seq_len: usize,
    pub dim: usize,
    /// Share of labels flipped after generation.
    pub label_noise: f64,
    pub signal: f64,
    pub noise_std: f64,
    /// Shortest unmasked prefix.
    pub min_active: usize,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            examples: 1000,
            seq_len: 16,
            dim: 24,
            label_noise: 0.1,
            signal: 3.0,
            noise_std: 1.0,
            min_active: 8,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData<T> {
    pub samples: Vec<Sample<T>>,
    /// Whether each example's label was flipped.
    pub flipped: Vec<bool>,
}

pub fn two_cluster_features<T: Real>(cfg: &ClusterConfig) -> SyntheticData<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut u: Vec<f64> = (0..cfg.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    u.iter_mut().for_each(|v| *v /= norm);

    let min_active = cfg.min_active.clamp(1, cfg.seq_len.max(1));
    let mut samples = Vec::with_capacity(cfg.examples);
    for _ in 0..cfg.examples {
        let label: u8 = rng.random_range(0..2);
        let sign = if label == 1 { 1.0 } else { -1.0 };
        let active = rng.random_range(min_active..=cfg.seq_len);
        let must = rng.random_range(0..active);
        let mut data = vec![T::zero(); cfg.seq_len * cfg.dim];
        for t in 0..active {
            let carries = t == must || rng.random_bool(0.5);
            for k in 0..cfg.dim {
                let eps: f64 = StandardNormal.sample(&mut rng);
                let v = cfg.noise_std * eps + if carries { sign * cfg.signal * u[k] } else { 0.0 };
                data[t * cfg.dim + k] = T::lit(v);
            }
        }
        let mut mask = vec![0u8; cfg.seq_len];
        mask[..active].iter_mut().for_each(|m| *m = 1);
        let input = ModelInput::Features(FeatureMatrix {
            data: Tensor::new(&[cfg.seq_len, cfg.dim], data).expect("shape matches data"),
            mask,
        });
        samples.push(Sample::new(input, label));
    }

    let n_flip = (cfg.label_noise * cfg.examples as f64).round() as usize;
    let mut order: Vec<usize> = (0..cfg.examples).collect();
    order.shuffle(&mut rng);
    let mut flipped = vec![false; cfg.examples];
    for &i in order.iter().take(n_flip) {
        samples[i].label = 1 - samples[i].label;
        flipped[i] = true;
    }
    SyntheticData { samples, flipped }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_noise_and_determinism() {
        let cfg = ClusterConfig {
            examples: 100,
            ..ClusterConfig::default()
        };
        let a = two_cluster_features::<f32>(&cfg);
        let b = two_cluster_features::<f32>(&cfg);
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.flipped.iter().filter(|&&f| f).count(), 10);
        for s in &a.samples {
            let ModelInput::Features(f) = &s.input else { panic!() };
            assert_eq!(f.data.shape(), &[16, 24]);
            assert!(f.active_len() >= 8);
            assert!(f.data.row(15).iter().all(|&v| v == 0.0) || f.active_len() == 16);
        }
    }
}
