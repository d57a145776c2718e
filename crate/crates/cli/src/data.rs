//! Loading training inputs, held-out sets and checkpoints from disk.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hybridsent::encoder::{FeatureCache, FEATURE_CACHE_MAGIC};
use hybridsent::model::{sidecar_path, InputDims, ModelInput, Representation, Sample};
use hybridsent::text::{encode, read_jsonl, wordpiece_tokenize, TokenizedExample, Vocab};
use hybridsent::Error;
use serde::{Deserialize, Serialize};

use crate::opts::InputArgs;

pub type Samples = Vec<Sample<f32>>;

/// A labeled dataset together with the shape models need to consume it.
pub struct Dataset {
    pub samples: Samples,
    pub dims: InputDims,
    pub representation: Representation,
    pub source: PathBuf,
}

/// Held-out token sequences; the on-disk form of an embedding-path test set.
#[derive(Debug, Serialize, Deserialize)]
pub struct TokenSet {
    pub vocab_size: usize,
    pub seq_len: usize,
    pub examples: Vec<TokenRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TokenRecord {
    #[serde(flatten)]
    pub tokens: TokenizedExample,
    pub label: u8,
}

pub fn load_features(path: &Path) -> Result<Dataset> {
    let cache = FeatureCache::read(path).with_context(|| format!("reading {}", path.display()))?;
    let dims = InputDims::features(cache.seq_len, cache.hidden);
    let samples = cache
        .into_matrices::<f32>()?
        .into_iter()
        .map(|(m, label)| Sample::new(ModelInput::Features(m), label))
        .collect();
    Ok(Dataset {
        samples,
        dims,
        representation: Representation::BertFeatures,
        source: path.to_path_buf(),
    })
}

/// Tokenizes cleaned JSON lines into fixed-length sequences.
pub fn tokenize_jsonl(data: &Path, vocab: &Vocab, seq_len: usize) -> Result<Vec<(TokenizedExample, u8)>> {
    let examples = read_jsonl(data)?;
    examples
        .iter()
        .map(|ex| Ok((encode(&wordpiece_tokenize(&ex.text, vocab), vocab, seq_len)?, ex.label)))
        .collect()
}

pub fn load_input(input: &InputArgs) -> Result<Dataset> {
    let data = match (&input.features, &input.data) {
        (Some(f), None) => load_features(f)?,
        (None, Some(d)) => {
            let vocab_path = input.vocab.as_deref().expect("clap requires --vocab with --data");
            let vocab = Vocab::load(vocab_path)?;
            let samples = tokenize_jsonl(d, &vocab, input.seq_len)?
                .into_iter()
                .map(|(t, label)| Sample::new(ModelInput::Tokens(t), label))
                .collect();
            Dataset {
                samples,
                dims: InputDims::tokens(input.seq_len, vocab.len()),
                representation: Representation::TrainableEmbedding,
                source: d.clone(),
            }
        }
        _ => return Err(Error::Config("exactly one of --features or --data is required".into()).into()),
    };
    if let Some(rep) = input.rep {
        if rep != data.representation {
            return Err(Error::Config(format!(
                "--rep {rep} does not match the {} input",
                data.representation
            ))
            .into());
        }
    }
    Ok(data)
}

/// Writes `samples` next to the checkpoints so `eval` scores the same split.
pub fn write_test_set(dir: &Path, samples: &[Sample<f32>], dims: InputDims) -> Result<PathBuf> {
    let features: Option<Vec<_>> = samples
        .iter()
        .map(|s| match &s.input {
            ModelInput::Features(m) => Some((m.clone(), s.label)),
            ModelInput::Tokens(_) => None,
        })
        .collect();
    if let Some(items) = features {
        let path = dir.join("test.bfc");
        FeatureCache::from_matrices(&items)?.write(&path)?;
        return Ok(path);
    }
    let examples = samples
        .iter()
        .map(|s| match &s.input {
            ModelInput::Tokens(t) => Ok(TokenRecord {
                tokens: t.clone(),
                label: s.label,
            }),
            ModelInput::Features(_) => Err(Error::Config("mixed inputs in one test set".into())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let set = TokenSet {
        vocab_size: dims.vocab_size,
        seq_len: dims.seq_len,
        examples,
    };
    let path = dir.join("test.tokens.json");
    fs::write(&path, serde_json::to_string(&set)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn read_token_set(path: &Path) -> Result<TokenSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let set: TokenSet = serde_json::from_str(&text)
        .map_err(Error::from)
        .with_context(|| format!("parsing {}", path.display()))?;
    if let Some(bad) = set.examples.iter().find(|r| r.tokens.len() != set.seq_len) {
        return Err(Error::Format {
            format: "token set",
            message: format!("sequence of length {} in a set of length {}", bad.tokens.len(), set.seq_len),
        }
        .into());
    }
    Ok(set)
}

/// Reads a held-out set in either format, sniffing the feature-cache magic.
pub fn load_test_set(path: &Path) -> Result<Dataset> {
    let mut head = [0u8; 4];
    let is_cache = fs::File::open(path)
        .and_then(|mut f| f.read(&mut head))
        .map(|n| n == 4 && &head == FEATURE_CACHE_MAGIC)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
    if is_cache {
        return load_features(path);
    }
    let set = read_token_set(path)?;
    Ok(Dataset {
        dims: InputDims::tokens(set.seq_len, set.vocab_size),
        samples: set
            .examples
            .into_iter()
            .map(|r| Sample::new(ModelInput::Tokens(r.tokens), r.label))
            .collect(),
        representation: Representation::TrainableEmbedding,
        source: path.to_path_buf(),
    })
}

/// Checkpoint weight files under `roots`, in sorted order. Directories are
/// searched recursively; a file counts when its JSON sidecar exists.
pub fn find_checkpoints(roots: &[PathBuf]) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        let entries = fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))?;
        for entry in entries {
            let path = entry?.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else if path.extension().is_some_and(|e| e == "ntc") && sidecar_path(&path).is_file() {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut found = Vec::new();
    for root in roots {
        if root.is_dir() {
            walk(root, &mut found)?;
        } else if root.is_file() {
            found.push(root.clone());
        } else {
            return Err(Error::Io {
                path: root.clone(),
                source: std::io::Error::from(std::io::ErrorKind::NotFound),
            }
            .into());
        }
    }
    found.sort();
    found.dedup();
    if found.is_empty() {
        return Err(Error::EmptyInput("checkpoint search").into());
    }
    Ok(found)
}
