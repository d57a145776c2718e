//! The seven classifier architectures over either representation front end.

mod checkpoint;
mod net;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layers::RnnKind;

pub use checkpoint::{load_checkpoint, save_checkpoint, sidecar_path, CheckpointMeta};
pub use net::{
    argmax_class, build_model, ForwardCache, InputDims, LayerKind, Model, ModelInput, ModelParams, Sample,
    LOCAL_POOL_STRIDE, LOCAL_POOL_WINDOW, NUM_CLASSES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Architecture {
    #[serde(rename = "CNN-LSTM")]
    CnnLstm,
    #[serde(rename = "LSTM-CNN")]
    LstmCnn,
    #[serde(rename = "CNN-GRU")]
    CnnGru,
    #[serde(rename = "GRU-CNN")]
    GruCnn,
    #[serde(rename = "CNN")]
    Cnn,
    #[serde(rename = "LSTM")]
    Lstm,
    #[serde(rename = "GRU")]
    Gru,
}

impl Architecture {
    /// Report row order: hybrids first, then single models.
    pub const ALL: [Architecture; 7] = [
        Architecture::CnnLstm,
        Architecture::LstmCnn,
        Architecture::CnnGru,
        Architecture::GruCnn,
        Architecture::Cnn,
        Architecture::Lstm,
        Architecture::Gru,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Architecture::CnnLstm => "CNN-LSTM",
            Architecture::LstmCnn => "LSTM-CNN",
            Architecture::CnnGru => "CNN-GRU",
            Architecture::GruCnn => "GRU-CNN",
            Architecture::Cnn => "CNN",
            Architecture::Lstm => "LSTM",
            Architecture::Gru => "GRU",
        }
    }

    pub fn rnn_kind(self) -> Option<RnnKind> {
        match self {
            Architecture::CnnLstm | Architecture::LstmCnn | Architecture::Lstm => Some(RnnKind::Lstm),
            Architecture::CnnGru | Architecture::GruCnn | Architecture::Gru => Some(RnnKind::Gru),
            Architecture::Cnn => None,
        }
    }

    pub fn has_conv(self) -> bool {
        !matches!(self, Architecture::Lstm | Architecture::Gru)
    }

    pub fn is_hybrid(self) -> bool {
        self.has_conv() && self.rnn_kind().is_some()
    }

    /// Convolution feeds the recurrent layer.
    pub fn conv_first(self) -> bool {
        matches!(self, Architecture::CnnLstm | Architecture::CnnGru)
    }

    /// The single recurrent model a hybrid extends, if any.
    pub fn single_rnn(self) -> Option<Architecture> {
        match (self.is_hybrid(), self.rnn_kind()) {
            (true, Some(RnnKind::Lstm)) => Some(Architecture::Lstm),
            (true, Some(RnnKind::Gru)) => Some(Architecture::Gru),
            _ => None,
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('_', "-");
        Architecture::ALL
            .into_iter()
            .find(|a| a.label() == norm)
            .ok_or_else(|| Error::Config(format!("unknown architecture {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    /// Frozen encoder output, consumed directly.
    BertFeatures,
    /// Token ids through a trainable lookup table.
    TrainableEmbedding,
}

impl Representation {
    pub const ALL: [Representation; 2] = [Representation::BertFeatures, Representation::TrainableEmbedding];

    pub fn label(self) -> &'static str {
        match self {
            Representation::BertFeatures => "BERT",
            Representation::TrainableEmbedding => "Embedding",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bert" | "bert-features" | "features" => Ok(Representation::BertFeatures),
            "embedding" | "trainable-embedding" | "emb" => Ok(Representation::TrainableEmbedding),
            _ => Err(Error::Config(format!("unknown representation {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub kind: Architecture,
    pub representation: Representation,
}

impl ArchitectureSpec {
    pub fn new(kind: Architecture, representation: Representation) -> Self {
        ArchitectureSpec { kind, representation }
    }

    /// All 14 reported combinations, BERT group first.
    pub fn all() -> Vec<ArchitectureSpec> {
        Representation::ALL
            .into_iter()
            .flat_map(|r| Architecture::ALL.into_iter().map(move |a| ArchitectureSpec::new(a, r)))
            .collect()
    }
}

impl fmt::Display for ArchitectureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.representation, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub num_filters: usize,
    pub region_size: usize,
    pub cnn_l2: f64,
    pub kernel_l2: f64,
    pub recurrent_l2: f64,
    pub dense_l2: f64,
    pub rnn_units: usize,
    /// Only read on the trainable-embedding path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_size: Option<usize>,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            num_filters: 250,
            region_size: 4,
            cnn_l2: 0.001,
            kernel_l2: 0.001,
            recurrent_l2: 0.001,
            dense_l2: 0.001,
            rnn_units: 150,
            embedding_size: Some(100),
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_filters == 0 || self.region_size == 0 || self.rnn_units == 0 {
            return Err(Error::Config("filters, region size and units must be positive".into()));
        }
        if self.embedding_size == Some(0) {
            return Err(Error::Config("embedding size must be positive".into()));
        }
        for (name, v) in [
            ("cnn_l2", self.cnn_l2),
            ("kernel_l2", self.kernel_l2),
            ("recurrent_l2", self.recurrent_l2),
            ("dense_l2", self.dense_l2),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }
}
