//! Sentiment classification with frozen contextual features or trainable
//! embeddings feeding CNN, LSTM, GRU and hybrid CNN/RNN classifiers.
//!
//! Pipeline: [`text`] cleans and tokenizes reviews, [`encoder`] turns token
//! ids into `L x H` feature matrices, [`model`] wires the [`layers`] into the
//! seven architectures, [`train`] fits them, [`hpo`] searches the
//! hyperparameter grid and [`eval`] scores and reports the runs.

pub mod config;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod hpo;
pub mod layers;
pub mod model;
pub mod ntc;
pub mod par;
pub mod synthetic;
pub mod tensor;
pub mod text;
pub mod train;

pub use error::{Error, Result};
pub use par::Exec;
pub use tensor::{Real, Tensor};
