use anyhow::{Context, Result};
use hybridsent::config::RunConfig;
use hybridsent::encoder::{extract_features, Encoder, EncoderConfig, EncoderWeights};
use hybridsent::ntc::NamedTensors;
use hybridsent::text::Vocab;
use hybridsent::{Error, Exec};

use super::{create_dir, read_json};
use crate::data::tokenize_jsonl;
use crate::opts::FeaturesArgs;

pub fn run(a: FeaturesArgs, exec: Exec) -> Result<()> {
    let config: EncoderConfig = read_json(&a.config)?;
    config.validate()?;
    let vocab = Vocab::load(&a.vocab)?;
    if vocab.len() != config.vocab_size {
        return Err(Error::Config(format!(
            "vocabulary has {} tokens but the encoder expects {}",
            vocab.len(),
            config.vocab_size
        ))
        .into());
    }
    let container = NamedTensors::read(&a.weights)?;
    let weights = EncoderWeights::<f32>::from_container(&container, &config)
        .with_context(|| format!("loading {}", a.weights.display()))?;
    let encoder = Encoder::new(config, weights)?;
    let dataset = tokenize_jsonl(&a.data, &vocab, a.seq_len)?;

    create_dir(&a.out)?;
    let path = a.out.join("features.bfc");
    extract_features(&dataset, &encoder, &path, exec)?;
    RunConfig {
        dataset: Some(a.data),
        output_dir: Some(a.out.clone()),
        ..RunConfig::default()
    }
    .write_snapshot(&a.out)?;
    println!(
        "{} examples x {} positions x {} features -> {}",
        dataset.len(),
        a.seq_len,
        encoder.config.hidden,
        path.display()
    );
    Ok(())
}
