mod common;

use common::{random_search_best, rng, GridObjective};
use hybridsent::hpo::{
    expected_improvement, gp_posterior, optimize, suggest, trial_rng, GpConfig, HpoSettings, SearchSpace, Trial,
    TrialStatus, RANDOM_TRIALS,
};
use hybridsent::model::{Architecture, ArchitectureSpec, Representation};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn bert(a: Architecture) -> ArchitectureSpec {
    ArchitectureSpec::new(a, Representation::BertFeatures)
}

/// Posterior by explicit matrix inverse, with the same standardization.
fn gp_oracle(x: &[Vec<f64>], y: &[f64], q: &[f64], cfg: GpConfig) -> (f64, f64) {
    let n = x.len();
    let k = |a: &[f64], b: &[f64]| {
        let d2: f64 = a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum();
        cfg.signal_std.powi(2) * (-d2 / (2.0 * cfg.length_scale.powi(2))).exp()
    };
    let mean = y.iter().sum::<f64>() / n as f64;
    let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let kk = DMatrix::from_fn(n, n, |i, j| k(&x[i], &x[j]) + if i == j { cfg.noise_std.powi(2) } else { 0.0 });
    let inv = kk.try_inverse().unwrap();
    let ks = DVector::from_fn(n, |i, _| k(&x[i], q));
    let ys = DVector::from_fn(n, |i, _| (y[i] - mean) / sd);
    let mu = (ks.transpose() * &inv * ys)[(0, 0)];
    let var = k(q, q) - (ks.transpose() * &inv * &ks)[(0, 0)];
    (mean + sd * mu, var.max(0.0) * sd * sd)
}

fn ei_oracle(mean: f64, var: f64, best: f64) -> f64 {
    let s = var.sqrt();
    if s == 0.0 {
        return (mean - best).max(0.0);
    }
    let z = (mean - best) / s;
    let n = Normal::new(0.0, 1.0).unwrap();
    (mean - best) * n.cdf(z) + s * n.pdf(z)
}

#[test]
fn posterior_matches_matrix_inverse() {
    let mut r = rng(1);
    let cfg = GpConfig::default();
    for _ in 0..30 {
        let n = r.random_range(2..10);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| r.random_range(0.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| r.random_range(0.5..0.9)).collect();
        let q: Vec<f64> = (0..4).map(|_| r.random_range(0.0..1.0)).collect();
        let (m, v) = gp_posterior(&x, &y, &q, cfg).unwrap();
        let (mo, vo) = gp_oracle(&x, &y, &q, cfg);
        assert!((m - mo).abs() < 1e-6, "mean {m} vs {mo}");
        assert!((v - vo).abs() < 1e-6, "var {v} vs {vo}");
    }
}

#[test]
fn ei_at_the_incumbent_is_the_normal_density_at_zero() {
    assert!((expected_improvement(0.0, 1.0, 0.0) - 0.398_942_28).abs() < 1e-5);
    assert_eq!(expected_improvement(0.5, 0.0, 0.2), 0.5 - 0.2);
    assert_eq!(expected_improvement(0.1, 0.0, 0.2), 0.0);
}

proptest! {
    #[test]
    fn ei_matches_closed_form(mean in -3.0f64..3.0, var in 1e-6f64..4.0, best in -3.0f64..3.0) {
        let ei = expected_improvement(mean, var, best);
        prop_assert!(ei >= 0.0);
        prop_assert!((ei - ei_oracle(mean, var, best)).abs() < 1e-9);
        prop_assert!(expected_improvement(mean + 0.1, var, best) >= ei);
    }
}

#[test]
fn guided_suggestion_maximizes_ei_over_the_open_grid() {
    let space = SearchSpace::for_spec(bert(Architecture::CnnLstm), false);
    let f = GridObjective::new(space.dims.len(), 5);
    let mut history: Vec<Trial> = Vec::new();
    for index in 0..6 {
        let g = suggest(&history, &space, GpConfig::default(), &mut trial_rng(9, index)).unwrap();
        if index >= RANDOM_TRIALS {
            let x: Vec<Vec<f64>> = history
                .iter()
                .map(|t| space.encode_point(&space.point(t.grid_index).unwrap()))
                .collect();
            let y: Vec<f64> = history.iter().map(|t| t.score.unwrap()).collect();
            let best = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ei = |i: usize| {
                let (m, v) = gp_oracle(&x, &y, &space.encode_point(&space.point(i).unwrap()), GpConfig::default());
                ei_oracle(m, v, best)
            };
            let top = (0..space.size())
                .filter(|i| history.iter().all(|t| t.grid_index != *i))
                .map(ei)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(ei(g) >= top - 1e-9, "trial {index}: EI {} < {top}", ei(g));
        }
        assert!(history.iter().all(|t| t.grid_index != g));
        history.push(Trial {
            index,
            grid_index: g,
            config: space.config_at(g).unwrap(),
            score: Some(f.eval(&space.encode_point(&space.point(g).unwrap()))),
            seed: 0,
            status: TrialStatus::Completed,
            error: None,
        });
    }
}

/// Mean best score of 10-trial BO and of 10-trial random search over `n`
/// seeded objectives on `space`.
fn bo_vs_random(space: &SearchSpace, n: u64) -> (f64, f64) {
    let grid: Vec<Vec<f64>> = (0..space.size())
        .map(|i| space.encode_point(&space.point(i).unwrap()))
        .collect();
    let (mut bo, mut rs) = (0.0, 0.0);
    for seed in 0..n {
        let f = GridObjective::new(space.dims.len(), 1000 + seed);
        let scores: Vec<f64> = grid.iter().map(|x| f.eval(x)).collect();
        let settings = HpoSettings {
            search_seed: seed,
            ..HpoSettings::default()
        };
        let out = optimize(
            space,
            |hp, _| Ok(f.eval(&space.encode(hp)?)),
            &settings,
            None,
        )
        .unwrap();
        assert_eq!(out.trials.len(), 10);
        bo += out.best.score.unwrap();
        rs += random_search_best(&scores, 10, 5000 + seed);
    }
    (bo / n as f64, rs / n as f64)
}

#[test]
fn bayesian_search_beats_random_search_on_average() {
    for a in [Architecture::CnnLstm, Architecture::Cnn, Architecture::Gru] {
        let space = SearchSpace::for_spec(bert(a), false);
        let (bo, rs) = bo_vs_random(&space, 30);
        assert!(bo >= rs, "{a}: BO {bo:.4} < random {rs:.4}");
    }
}
