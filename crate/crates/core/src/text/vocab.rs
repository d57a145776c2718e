use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PAD: &str = "[PAD]";
pub const UNK: &str = "[UNK]";
pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";

/// Fixed encoder input length.
pub const MAX_SEQ_LEN: usize = 128;

const CONTINUATION: &str = "##";
const MAX_WORD_CHARS: usize = 100;

/// WordPiece vocabulary; a token's id is its 0-based line index.
#[derive(Debug, Clone)]
pub struct Vocab {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    pad: u32,
    unk: u32,
    cls: u32,
    sep: u32,
}

impl Vocab {
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut ids = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            ids.entry(t.clone()).or_insert(i as u32);
        }
        let special = |name: &'static str| ids.get(name).copied().ok_or(Error::MissingSpecialToken(name));
        let (pad, unk, cls, sep) = (special(PAD)?, special(UNK)?, special(CLS)?, special(SEP)?);
        Ok(Vocab {
            tokens,
            ids,
            pad,
            unk,
            cls,
            sep,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let tokens = text
            .lines()
            .map(|l| l.trim_end_matches('\r').to_string())
            .collect();
        Self::from_tokens(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    pub fn pad_id(&self) -> u32 {
        self.pad
    }

    pub fn unk_id(&self) -> u32 {
        self.unk
    }

    pub fn cls_id(&self) -> u32 {
        self.cls
    }

    pub fn sep_id(&self) -> u32 {
        self.sep
    }
}

/// Whitespace pre-split followed by greedy longest-match-first subword
/// segmentation. Continuation pieces carry the `##` prefix. A word that
/// cannot be fully segmented becomes a single `[UNK]`.
pub fn wordpiece_tokenize(text: &str, vocab: &Vocab) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        match segment_word(word, vocab) {
            Some(pieces) => out.extend(pieces),
            None => out.push(UNK.to_string()),
        }
    }
    out
}

fn segment_word(word: &str, vocab: &Vocab) -> Option<Vec<String>> {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() > MAX_WORD_CHARS {
        return None;
    }
    let mut pieces = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let mut end = chars.len();
        let mut found = None;
        while start < end {
            let mut candidate: String = chars[start..end].iter().collect();
            if start > 0 {
                candidate.insert_str(0, CONTINUATION);
            }
            if vocab.contains(&candidate) {
                found = Some(candidate);
                break;
            }
            end -= 1;
        }
        pieces.push(found?);
        start = end;
    }
    Some(pieces)
}

/// Fixed-length encoder input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedExample {
    pub ids: Vec<u32>,
    pub attention_mask: Vec<u8>,
    pub segment_ids: Vec<u8>,
}

impl TokenizedExample {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Number of non-pad positions.
    pub fn active_len(&self) -> usize {
        self.attention_mask.iter().filter(|&&m| m == 1).count()
    }
}

/// `[CLS] tokens[..len-2] [SEP] [PAD]...` up to exactly `len` positions.
pub fn encode(tokens: &[String], vocab: &Vocab, len: usize) -> Result<TokenizedExample> {
    if len < 2 {
        return Err(Error::Config(format!(
            "sequence length {len} cannot hold [CLS] and [SEP]"
        )));
    }
    let keep = tokens.len().min(len - 2);
    let mut ids = Vec::with_capacity(len);
    ids.push(vocab.cls_id());
    for t in &tokens[..keep] {
        ids.push(vocab.id(t).ok_or_else(|| Error::UnknownToken(t.clone()))?);
    }
    ids.push(vocab.sep_id());
    let active = ids.len();
    ids.resize(len, vocab.pad_id());
    let mut attention_mask = vec![1u8; active];
    attention_mask.resize(len, 0);
    Ok(TokenizedExample {
        ids,
        attention_mask,
        segment_ids: vec![0; len],
    })
}
