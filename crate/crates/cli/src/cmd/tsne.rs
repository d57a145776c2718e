use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use hybridsent::config::RunConfig;
use hybridsent::eval::{emit_plot, tsne, TsneConfig};
use hybridsent::model::{load_checkpoint, Representation};
use hybridsent::{Error, Exec};

use super::{create_dir, write_file};
use crate::data::{load_features, read_token_set};
use crate::opts::TsneArgs;

fn truncate<T>(mut v: Vec<T>, max: Option<usize>) -> Vec<T> {
    if let Some(m) = max {
        v.truncate(m);
    }
    v
}

/// Mean feature row per example.
fn feature_points(path: &Path, max: Option<usize>) -> Result<(Vec<Vec<f64>>, Vec<u8>)> {
    let data = load_features(path)?;
    Ok(truncate(data.samples, max)
        .into_iter()
        .map(|s| match s.input {
            hybridsent::model::ModelInput::Features(m) => {
                (m.mean_pooled().into_iter().map(f64::from).collect(), s.label)
            }
            hybridsent::model::ModelInput::Tokens(_) => unreachable!("feature caches hold features"),
        })
        .unzip())
}

/// Mean learned embedding of the non-pad tokens of each example.
fn embedding_points(checkpoint: &Path, tokens: &Path, max: Option<usize>) -> Result<(Vec<Vec<f64>>, Vec<u8>)> {
    let (model, meta) = load_checkpoint::<f64>(checkpoint).with_context(|| format!("loading {}", checkpoint.display()))?;
    if meta.spec.representation != Representation::TrainableEmbedding {
        return Err(Error::Config(format!("{} has no embedding table", checkpoint.display())).into());
    }
    let table = &model.params.embedding.as_ref().expect("embedding models own a table").table;
    let set = read_token_set(tokens)?;
    if set.vocab_size != meta.dims.vocab_size {
        return Err(Error::Config(format!(
            "token set vocabulary {} differs from the checkpoint's {}",
            set.vocab_size, meta.dims.vocab_size
        ))
        .into());
    }
    let dim = table.cols();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for r in truncate(set.examples, max) {
        let mut p = vec![0.0; dim];
        let mut n = 0usize;
        for (&id, &m) in r.tokens.ids.iter().zip(&r.tokens.attention_mask) {
            if m == 1 {
                let row = table.row(id as usize);
                p.iter_mut().zip(row).for_each(|(a, b)| *a += b);
                n += 1;
            }
        }
        p.iter_mut().for_each(|v| *v /= n.max(1) as f64);
        points.push(p);
        labels.push(r.label);
    }
    Ok((points, labels))
}

fn project(name: &str, title: &str, points: &[Vec<f64>], labels: &[u8], cfg: &TsneConfig, out: &Path, exec: Exec) -> Result<()> {
    let result = tsne(points, cfg, exec).with_context(|| format!("projecting {name}"))?;
    emit_plot(&result.coords, labels, Some(title), &out.join(format!("tsne_{name}.svg")))?;
    let mut csv = String::from("x,y,label\n");
    for (c, l) in result.coords.iter().zip(labels) {
        let _ = writeln!(csv, "{},{},{}", c[0], c[1], l);
    }
    write_file(&out.join(format!("tsne_{name}.csv")), csv)?;
    println!(
        "{name}: {} points, KL {:.4} -> {:.4}",
        points.len(),
        result.initial_kl,
        result.final_kl
    );
    Ok(())
}

pub fn run(a: TsneArgs, exec: Exec) -> Result<()> {
    if a.features.is_none() && a.checkpoint.is_none() {
        return Err(Error::Config("tsne needs --features, --checkpoint with --tokens, or both".into()).into());
    }
    let cfg = TsneConfig {
        perplexity: a.perplexity,
        iterations: a.iterations,
        seed: a.seed,
        ..TsneConfig::default()
    };
    create_dir(&a.out)?;
    if let Some(f) = &a.features {
        let (points, labels) = feature_points(f, a.max_points)?;
        project("bert", "BERT features", &points, &labels, &cfg, &a.out, exec)?;
    }
    if let (Some(c), Some(t)) = (&a.checkpoint, &a.tokens) {
        let (points, labels) = embedding_points(c, t, a.max_points)?;
        project("embedding", "Trainable embedding", &points, &labels, &cfg, &a.out, exec)?;
    }
    RunConfig {
        dataset: a.features.clone().or(a.tokens.clone()),
        output_dir: Some(a.out.clone()),
        ..RunConfig::default()
    }
    .write_snapshot(&a.out)?;
    Ok(())
}
