use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hybridsent::hpo::Objective;
use hybridsent::model::{Architecture, Representation};

#[derive(Debug, Parser)]
#[command(name = "hybridsent", version, about = "Hybrid CNN/RNN sentiment classification toolkit")]
pub struct Cli {
    /// Run every stage on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean raw review JSONL and count labels.
    Preprocess(PreprocessArgs),
    /// Tokenize and encode a dataset into a feature cache.
    Features(FeaturesArgs),
    /// Train repeated runs of one or more architectures.
    Train(TrainArgs),
    /// Bayesian hyperparameter search for one architecture.
    Hpo(HpoArgs),
    /// Score checkpoints on held-out data and render the results table.
    Eval(EvalArgs),
    /// Project representations to 2-D and plot them.
    Tsne(TsneArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Raw `{"text", "label"}` JSON lines.
    #[arg(long)]
    pub data: PathBuf,
    /// `slang<TAB>canonical` dictionary.
    #[arg(long)]
    pub slang: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// Cleaned JSON lines.
    #[arg(long)]
    pub data: PathBuf,
    /// WordPiece vocabulary, one token per line.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Encoder weights in NTC1 format.
    #[arg(long)]
    pub weights: PathBuf,
    /// Encoder geometry as JSON.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = hybridsent::text::MAX_SEQ_LEN)]
    pub seq_len: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Where training examples come from.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// Feature cache; implies the frozen-feature representation.
    #[arg(long, conflicts_with = "data")]
    pub features: Option<PathBuf>,
    /// Cleaned JSON lines; implies the trainable-embedding representation.
    #[arg(long, requires = "vocab")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long, default_value_t = hybridsent::text::MAX_SEQ_LEN)]
    pub seq_len: usize,
    /// Must agree with the input kind when given.
    #[arg(long)]
    pub rep: Option<Representation>,
}

/// Overrides for the run configuration file.
#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Run configuration JSON; flags below take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base seed for initialization and shuffling.
    #[arg(long, env = "HYBRIDSENT_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    #[arg(long)]
    pub split_ratio: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub val_fraction: Option<f64>,
    /// Hyperparameters as JSON.
    #[arg(long)]
    pub hp: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Architectures to train; all seven when omitted.
    #[arg(long, value_delimiter = ',')]
    pub arch: Vec<Architecture>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HpoArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long)]
    pub arch: Option<Architecture>,
    /// Search space JSON replacing the built-in grid.
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// Use only the region sizes 4 and 5.
    #[arg(long)]
    pub as_printed: bool,
    #[arg(long)]
    pub max_trials: Option<usize>,
    #[arg(long)]
    pub objective: Option<Objective>,
    /// Seed for the suggestion sequence.
    #[arg(long, default_value_t = 0)]
    pub search_seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint files or directories searched recursively.
    #[arg(long, required = true, num_args = 1..)]
    pub checkpoints: Vec<PathBuf>,
    /// Held-out sets written by `train`.
    #[arg(long, required = true, num_args = 1..)]
    pub test: Vec<PathBuf>,
    /// Average precision and recall over both classes.
    #[arg(long = "macro")]
    pub macro_average: bool,
    /// Print numbers as `0,8768`.
    #[arg(long)]
    pub decimal_comma: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TsneArgs {
    /// Feature cache to plot.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Embedding-path checkpoint whose table embeds `--tokens`.
    #[arg(long, requires = "tokens")]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub tokens: Option<PathBuf>,
    #[arg(long, default_value_t = 30.0)]
    pub perplexity: f64,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    /// Plot only the first N examples.
    #[arg(long)]
    pub max_points: Option<usize>,
    #[arg(long, env = "HYBRIDSENT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}
