//! Raw review text to token ids and one-hot targets.

mod clean;
mod vocab;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use clean::clean_text;
pub use vocab::{
    encode, wordpiece_tokenize, TokenizedExample, Vocab, CLS, MAX_SEQ_LEN, PAD, SEP, UNK,
};

/// One labeled review. Label 0 is negative sentiment, 1 is positive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawExample {
    pub text: String,
    pub label: u8,
}

impl RawExample {
    pub fn new(text: impl Into<String>, label: u8) -> Result<Self> {
        if label > 1 {
            return Err(Error::InvalidLabel(label as i64));
        }
        Ok(RawExample {
            text: text.into(),
            label,
        })
    }
}

/// Two-class one-hot target: negative is `[1, 0]`, positive is `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelVector(pub [f64; 2]);

impl LabelVector {
    pub fn class(&self) -> u8 {
        if self.0[1] > self.0[0] {
            1
        } else {
            0
        }
    }
}

pub fn one_hot(label: i64) -> Result<LabelVector> {
    match label {
        0 => Ok(LabelVector([1.0, 0.0])),
        1 => Ok(LabelVector([0.0, 1.0])),
        other => Err(Error::InvalidLabel(other)),
    }
}

/// Colloquial-to-canonical token dictionary, matched on whole tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SlangDict {
    map: HashMap<String, String>,
}

impl SlangDict {
    pub fn from_pairs<K: AsRef<str>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        SlangDict {
            map: pairs
                .into_iter()
                .map(|(k, v)| (k.as_ref().to_lowercase(), v.into()))
                .collect(),
        }
    }

    /// Reads `slang<TAB>canonical` lines. Blank lines are skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (slang, canonical) = line.split_once('\t').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "expected slang<TAB>canonical".into(),
            })?;
            pairs.push((slang.trim().to_string(), canonical.trim().to_string()));
        }
        Ok(Self::from_pairs(pairs))
    }

    pub fn lookup(&self, token: &str) -> Option<&str> {
        self.map.get(token).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Deserialize)]
struct JsonLine {
    text: Option<String>,
    label: Option<i64>,
}

/// Reads a `{"text": ..., "label": 0|1}` JSON-lines file. Blank lines are
/// skipped; any malformed line is reported with its 1-based line number.
pub fn read_jsonl(path: &Path) -> Result<Vec<RawExample>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let rec: JsonLine = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let text = rec.text.ok_or_else(|| parse_err("missing \"text\"".into()))?;
        let label = rec.label.ok_or_else(|| parse_err("missing \"label\"".into()))?;
        if !(0..=1).contains(&label) {
            return Err(parse_err(format!("label must be 0 or 1, got {label}")));
        }
        out.push(RawExample {
            text,
            label: label as u8,
        });
    }
    Ok(out)
}

pub fn write_jsonl(path: &Path, examples: &[RawExample]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for ex in examples {
        serde_json::to_writer(&mut w, ex)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-label counts in the layout of a dataset description table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub positive: usize,
    pub negative: usize,
    pub total: usize,
}

impl LabelSummary {
    pub fn of(examples: &[RawExample]) -> Self {
        let positive = examples.iter().filter(|e| e.label == 1).count();
        LabelSummary {
            positive,
            negative: examples.len() - positive,
            total: examples.len(),
        }
    }
}

impl std::fmt::Display for LabelSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "positive {}, negative {}, total {}",
            self.positive, self.negative, self.total
        )
    }
}
