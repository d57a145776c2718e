use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Architecture, ArchitectureSpec, HyperParams, Representation};
use crate::encoder::FeatureMatrix;
use crate::error::{Error, Result};
use crate::layers::{
    conv1d_backward, conv1d_forward, dense_backward, dense_forward, embedding_backward,
    embedding_lookup, maxpool_global, maxpool_global_backward, maxpool_local,
    maxpool_local_backward, rnn_backward, rnn_forward, Conv1dCache, Conv1dParams, DenseParams,
    EmbeddingTable, ParamKind, ParamSet, PoolCache, RnnCache, RnnKind, RnnParams,
};
use crate::par::Exec;
use crate::tensor::{Activation, Real, Tensor};
use crate::text::TokenizedExample;
use crate::train::{softmax_cross_entropy, softmax_cross_entropy_grad};

/// Pooling between the convolution and the recurrent layer of CNN-first hybrids.
pub const LOCAL_POOL_WINDOW: usize = 2;
pub const LOCAL_POOL_STRIDE: usize = 2;

pub const NUM_CLASSES: usize = 2;

/// Examples per gradient work unit. Fixed so that the reduction order, and
/// therefore every bit of the result, does not depend on the executor.
const GRAD_CHUNK: usize = 8;

const CONV_ACTIVATION: Activation = Activation::Relu;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelInput<T> {
    Features(FeatureMatrix<T>),
    Tokens(TokenizedExample),
}

impl<T: Real> ModelInput<T> {
    pub fn mask(&self) -> &[u8] {
        match self {
            ModelInput::Features(f) => &f.mask,
            ModelInput::Tokens(t) => &t.attention_mask,
        }
    }

    pub fn seq_len(&self) -> usize {
        self.mask().len()
    }

    pub fn representation(&self) -> Representation {
        match self {
            ModelInput::Features(_) => Representation::BertFeatures,
            ModelInput::Tokens(_) => Representation::TrainableEmbedding,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub input: ModelInput<T>,
    pub label: u8,
}

impl<T> Sample<T> {
    pub fn new(input: ModelInput<T>, label: u8) -> Self {
        Sample { input, label }
    }
}

/// Shape of what the model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDims {
    pub seq_len: usize,
    /// Encoder hidden size on the feature path; unused for tokens.
    pub feature_dim: usize,
    /// Vocabulary size on the token path; unused for features.
    pub vocab_size: usize,
}

impl InputDims {
    pub fn features(seq_len: usize, feature_dim: usize) -> Self {
        InputDims {
            seq_len,
            feature_dim,
            vocab_size: 0,
        }
    }

    pub fn tokens(seq_len: usize, vocab_size: usize) -> Self {
        InputDims {
            seq_len,
            feature_dim: 0,
            vocab_size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Embedding,
    Conv,
    LocalPool,
    GlobalPool,
    Lstm,
    Gru,
    Dense,
}

impl LayerKind {
    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Embedding => "embedding",
            LayerKind::Conv => "conv",
            LayerKind::LocalPool => "localpool",
            LayerKind::GlobalPool => "globalpool",
            LayerKind::Lstm => "lstm",
            LayerKind::Gru => "gru",
            LayerKind::Dense => "dense",
        }
    }
}

/// Trainable tensors of a model; also used as its gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub embedding: Option<EmbeddingTable<T>>,
    pub conv: Option<Conv1dParams<T>>,
    pub rnn: Option<RnnParams<T>>,
    pub dense: DenseParams<T>,
}

impl<T: Real> ModelParams<T> {
    /// Tensors with checkpoint names, in a fixed order.
    pub fn named(&self) -> Vec<(String, ParamKind, &Tensor<T>)> {
        fn prefixed<'a, T: Real, P: ParamSet<T>>(
            prefix: &str,
            p: &'a P,
            out: &mut Vec<(String, ParamKind, &'a Tensor<T>)>,
        ) {
            out.extend(
                p.named()
                    .into_iter()
                    .map(|(n, k, t)| (format!("{prefix}.{n}"), k, t)),
            );
        }
        let mut out = Vec::new();
        if let Some(e) = &self.embedding {
            prefixed("embedding", e, &mut out);
        }
        if let Some(c) = &self.conv {
            prefixed("conv", c, &mut out);
        }
        if let Some(r) = &self.rnn {
            prefixed("rnn", r, &mut out);
        }
        prefixed("dense", &self.dense, &mut out);
        out
    }

    pub fn tensors(&self) -> Vec<&Tensor<T>> {
        self.named().into_iter().map(|(_, _, t)| t).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor<T>> {
        let mut out = Vec::new();
        if let Some(e) = &mut self.embedding {
            out.extend(e.tensors_mut());
        }
        if let Some(c) = &mut self.conv {
            out.extend(c.tensors_mut());
        }
        if let Some(r) = &mut self.rnn {
            out.extend(r.tensors_mut());
        }
        out.extend(self.dense.tensors_mut());
        out
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams {
            embedding: self.embedding.as_ref().map(|e| e.zeros_like()),
            conv: self.conv.as_ref().map(|c| c.zeros_like()),
            rnn: self.rnn.as_ref().map(|r| r.zeros_like()),
            dense: self.dense.zeros_like(),
        }
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// `self += other`, tensor by tensor.
    pub fn accumulate(&mut self, other: &Self) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, &y) in a.data_mut().iter_mut().zip(b.data()) {
                *x += y;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }
}

#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    ids: Option<Vec<u32>>,
    conv: Option<Conv1dCache<T>>,
    pool: Option<PoolCache>,
    rnn: Option<RnnCache<T>>,
    dense_in: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    pub spec: ArchitectureSpec,
    pub hp: HyperParams,
    pub dims: InputDims,
    pub seed: u64,
    pub params: ModelParams<T>,
}

/// Builds and initializes a model. Identical arguments give bit-identical
/// parameters.
pub fn build_model<T: Real>(spec: ArchitectureSpec, hp: &HyperParams, dims: InputDims, seed: u64) -> Result<Model<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = LayerShapes::resolve(spec, hp, dims)?;
    let embedding = shapes
        .embedding
        .map(|(v, e)| EmbeddingTable::init(v, e, &mut rng));
    let conv = shapes
        .conv
        .map(|(l, h, d)| Conv1dParams::init(l, h, d, &mut rng));
    let rnn = shapes
        .rnn
        .map(|(kind, u, d)| RnnParams::init(kind, u, d, &mut rng));
    let dense = DenseParams::init(NUM_CLASSES, shapes.dense_in, &mut rng);
    Ok(Model {
        spec,
        hp: hp.clone(),
        dims,
        seed,
        params: ModelParams {
            embedding,
            conv,
            rnn,
            dense,
        },
    })
}

struct LayerShapes {
    embedding: Option<(usize, usize)>,
    conv: Option<(usize, usize, usize)>,
    rnn: Option<(RnnKind, usize, usize)>,
    dense_in: usize,
}

impl LayerShapes {
    fn resolve(spec: ArchitectureSpec, hp: &HyperParams, dims: InputDims) -> Result<Self> {
        hp.validate()?;
        let (embedding, d) = match spec.representation {
            Representation::BertFeatures => {
                if dims.feature_dim == 0 {
                    return Err(Error::Config("feature dimension must be positive".into()));
                }
                (None, dims.feature_dim)
            }
            Representation::TrainableEmbedding => {
                let e = hp
                    .embedding_size
                    .ok_or_else(|| Error::Config("embedding path needs embedding_size".into()))?;
                if dims.vocab_size == 0 {
                    return Err(Error::Config("vocabulary size must be positive".into()));
                }
                (Some((dims.vocab_size, e)), e)
            }
        };
        let t = dims.seq_len;
        let (l, h, u) = (hp.num_filters, hp.region_size, hp.rnn_units);
        let kind = spec.kind;
        if kind.has_conv() && t < h {
            return Err(Error::Config(format!(
                "sequence length {t} is shorter than region size {h}"
            )));
        }
        if kind.conv_first() && t + 1 - h < LOCAL_POOL_WINDOW {
            return Err(Error::Config(format!(
                "convolution output length {} is shorter than the pooling window {LOCAL_POOL_WINDOW}",
                t + 1 - h
            )));
        }
        let rnn_kind = kind.rnn_kind();
        let shapes = match kind {
            Architecture::Cnn => LayerShapes {
                embedding,
                conv: Some((l, h, d)),
                rnn: None,
                dense_in: l,
            },
            Architecture::Lstm | Architecture::Gru => LayerShapes {
                embedding,
                conv: None,
                rnn: rnn_kind.map(|k| (k, u, d)),
                dense_in: u,
            },
            Architecture::CnnLstm | Architecture::CnnGru => LayerShapes {
                embedding,
                conv: Some((l, h, d)),
                rnn: rnn_kind.map(|k| (k, u, l)),
                dense_in: u,
            },
            Architecture::LstmCnn | Architecture::GruCnn => LayerShapes {
                embedding,
                conv: Some((l, h, u)),
                rnn: rnn_kind.map(|k| (k, u, d)),
                dense_in: l,
            },
        };
        Ok(shapes)
    }
}

fn missing(layer: &str) -> Error {
    Error::Config(format!("model has no {layer} layer"))
}

impl<T: Real> Model<T> {
    /// Same architecture and shapes with all parameters zero.
    pub fn zeros(spec: ArchitectureSpec, hp: &HyperParams, dims: InputDims, seed: u64) -> Result<Self> {
        let shapes = LayerShapes::resolve(spec, hp, dims)?;
        Ok(Model {
            spec,
            hp: hp.clone(),
            dims,
            seed,
            params: ModelParams {
                embedding: shapes.embedding.map(|(v, e)| EmbeddingTable::zeros(v, e)),
                conv: shapes.conv.map(|(l, h, d)| Conv1dParams::zeros(l, h, d)),
                rnn: shapes.rnn.map(|(k, u, d)| match k {
                    RnnKind::Lstm => RnnParams::Lstm(crate::layers::LstmParams::zeros(u, d)),
                    RnnKind::Gru => RnnParams::Gru(crate::layers::GruParams::zeros(u, d)),
                }),
                dense: DenseParams::zeros(NUM_CLASSES, shapes.dense_in),
            },
        })
    }

    pub fn layer_chain(&self) -> Vec<LayerKind> {
        let mut chain = Vec::new();
        if self.spec.representation == Representation::TrainableEmbedding {
            chain.push(LayerKind::Embedding);
        }
        let rnn = match self.spec.kind.rnn_kind() {
            Some(RnnKind::Lstm) => Some(LayerKind::Lstm),
            Some(RnnKind::Gru) => Some(LayerKind::Gru),
            None => None,
        };
        match self.spec.kind {
            Architecture::Cnn => chain.extend([LayerKind::Conv, LayerKind::GlobalPool]),
            Architecture::Lstm | Architecture::Gru => chain.extend(rnn),
            Architecture::CnnLstm | Architecture::CnnGru => {
                chain.extend([LayerKind::Conv, LayerKind::LocalPool]);
                chain.extend(rnn);
            }
            Architecture::LstmCnn | Architecture::GruCnn => {
                chain.extend(rnn);
                chain.extend([LayerKind::Conv, LayerKind::GlobalPool]);
            }
        }
        chain.push(LayerKind::Dense);
        chain
    }

    /// Width of the vector entering the dense layer.
    pub fn dense_input_dim(&self) -> usize {
        self.params.dense.in_dim()
    }

    /// Logits for one example plus everything backward needs.
    pub fn forward_one(&self, input: &ModelInput<T>) -> Result<(Vec<T>, ForwardCache<T>)> {
        let p = &self.params;
        let embedded;
        let (x, ids) = match (input, self.spec.representation) {
            (ModelInput::Features(f), Representation::BertFeatures) => {
                if f.data.rank() != 2 || f.hidden() != self.dims.feature_dim || f.mask.len() != f.seq_len() {
                    return Err(Error::shape(
                        "model input",
                        f.data.shape(),
                        &[f.mask.len(), self.dims.feature_dim],
                    ));
                }
                (&f.data, None)
            }
            (ModelInput::Tokens(t), Representation::TrainableEmbedding) => {
                let table = p.embedding.as_ref().ok_or_else(|| missing("embedding"))?;
                embedded = embedding_lookup(&t.ids, table)?;
                (&embedded, Some(t.ids.clone()))
            }
            (other, rep) => {
                return Err(Error::Config(format!(
                    "{rep} model cannot consume {} input",
                    other.representation()
                )))
            }
        };
        let mask = input.mask();
        let mut cache = ForwardCache {
            ids,
            conv: None,
            pool: None,
            rnn: None,
            dense_in: Vec::new(),
        };
        let conv = || p.conv.as_ref().ok_or_else(|| missing("convolution"));
        let rnn = || p.rnn.as_ref().ok_or_else(|| missing("recurrent"));
        cache.dense_in = match self.spec.kind {
            Architecture::Cnn => {
                let (c, cc) = conv1d_forward(x, conv()?, CONV_ACTIVATION)?;
                let (pooled, pc) = maxpool_global(&c)?;
                cache.conv = Some(cc);
                cache.pool = Some(pc);
                pooled.into_data()
            }
            Architecture::Lstm | Architecture::Gru => {
                let (h, rc) = rnn_forward(x, mask, rnn()?, false)?;
                cache.rnn = Some(rc);
                h.into_data()
            }
            Architecture::CnnLstm | Architecture::CnnGru => {
                let (c, cc) = conv1d_forward(x, conv()?, CONV_ACTIVATION)?;
                let (pooled, pc) = maxpool_local(&c, LOCAL_POOL_WINDOW, LOCAL_POOL_STRIDE)?;
                let ones = vec![1u8; pooled.rows()];
                let (h, rc) = rnn_forward(&pooled, &ones, rnn()?, false)?;
                cache.conv = Some(cc);
                cache.pool = Some(pc);
                cache.rnn = Some(rc);
                h.into_data()
            }
            Architecture::LstmCnn | Architecture::GruCnn => {
                let (seq, rc) = rnn_forward(x, mask, rnn()?, true)?;
                let (c, cc) = conv1d_forward(&seq, conv()?, CONV_ACTIVATION)?;
                let (pooled, pc) = maxpool_global(&c)?;
                cache.rnn = Some(rc);
                cache.conv = Some(cc);
                cache.pool = Some(pc);
                pooled.into_data()
            }
        };
        let logits = dense_forward(&cache.dense_in, &p.dense)?;
        Ok((logits, cache))
    }

    /// Adds parameter gradients into `grads` and returns the gradient with
    /// respect to the representation entering the first non-embedding layer.
    pub fn backward_one(&self, cache: &ForwardCache<T>, dlogits: &[T], grads: &mut ModelParams<T>) -> Result<Tensor<T>> {
        let p = &self.params;
        let d_dense_in = dense_backward(&p.dense, &cache.dense_in, dlogits, &mut grads.dense);
        let conv_p = p.conv.as_ref().ok_or_else(|| missing("convolution"));
        let rnn_p = p.rnn.as_ref().ok_or_else(|| missing("recurrent"));
        let cached = |what: &str| Error::Config(format!("forward cache has no {what} state"));
        let dx = match self.spec.kind {
            Architecture::Cnn => {
                let pc = cache.pool.as_ref().ok_or_else(|| cached("pool"))?;
                let cc = cache.conv.as_ref().ok_or_else(|| cached("conv"))?;
                let gc = grads.conv.as_mut().ok_or_else(|| missing("convolution"))?;
                let dc = maxpool_global_backward(pc, &d_dense_in);
                conv1d_backward(conv_p?, cc, &dc, gc)?
            }
            Architecture::Lstm | Architecture::Gru => {
                let rc = cache.rnn.as_ref().ok_or_else(|| cached("recurrent"))?;
                let gr = grads.rnn.as_mut().ok_or_else(|| missing("recurrent"))?;
                rnn_backward(rnn_p?, rc, &Tensor::vector(d_dense_in), gr)?
            }
            Architecture::CnnLstm | Architecture::CnnGru => {
                let rc = cache.rnn.as_ref().ok_or_else(|| cached("recurrent"))?;
                let pc = cache.pool.as_ref().ok_or_else(|| cached("pool"))?;
                let cc = cache.conv.as_ref().ok_or_else(|| cached("conv"))?;
                let gr = grads.rnn.as_mut().ok_or_else(|| missing("recurrent"))?;
                let dp = rnn_backward(rnn_p?, rc, &Tensor::vector(d_dense_in), gr)?;
                let dc = maxpool_local_backward(pc, &dp);
                let gc = grads.conv.as_mut().ok_or_else(|| missing("convolution"))?;
                conv1d_backward(conv_p?, cc, &dc, gc)?
            }
            Architecture::LstmCnn | Architecture::GruCnn => {
                let pc = cache.pool.as_ref().ok_or_else(|| cached("pool"))?;
                let cc = cache.conv.as_ref().ok_or_else(|| cached("conv"))?;
                let rc = cache.rnn.as_ref().ok_or_else(|| cached("recurrent"))?;
                let dc = maxpool_global_backward(pc, &d_dense_in);
                let gc = grads.conv.as_mut().ok_or_else(|| missing("convolution"))?;
                let ds = conv1d_backward(conv_p?, cc, &dc, gc)?;
                let gr = grads.rnn.as_mut().ok_or_else(|| missing("recurrent"))?;
                rnn_backward(rnn_p?, rc, &ds, gr)?
            }
        };
        if let Some(ids) = &cache.ids {
            let ge = grads.embedding.as_mut().ok_or_else(|| missing("embedding"))?;
            embedding_backward(ids, &dx, ge);
        }
        Ok(dx)
    }

    pub fn logits(&self, input: &ModelInput<T>) -> Result<Vec<T>> {
        self.forward_one(input).map(|(l, _)| l)
    }

    /// `[B, 2]` logits.
    pub fn forward(&self, inputs: &[&ModelInput<T>], exec: Exec) -> Result<Tensor<T>> {
        let rows = exec.map(inputs, |x| self.logits(x));
        let mut data = Vec::with_capacity(inputs.len() * NUM_CLASSES);
        for r in rows {
            data.extend(r?);
        }
        Tensor::new(&[inputs.len(), NUM_CLASSES], data)
    }

    /// Argmax class per input; ties go to class 0.
    pub fn predict(&self, inputs: &[&ModelInput<T>], exec: Exec) -> Result<Vec<u8>> {
        let logits = self.forward(inputs, exec)?;
        Ok((0..inputs.len())
            .map(|i| argmax_class(logits.row(i)))
            .collect())
    }

    /// `cnn_l2 * sum W_conv^2 + kernel_l2 * sum W_*x^2 + recurrent_l2 * sum W_*h^2
    /// + dense_l2 * sum W_dense^2`. Biases and the embedding table are free.
    pub fn l2_penalty(&self) -> T {
        self.params
            .named()
            .into_iter()
            .map(|(_, kind, t)| self.l2_coefficient(kind) * t.sum_squares())
            .fold(T::zero(), |a, b| a + b)
    }

    /// Adds `2 * lambda * W` for every penalized tensor.
    pub fn add_l2_grad(&self, grads: &mut ModelParams<T>) {
        let kinds: Vec<ParamKind> = self.params.named().into_iter().map(|(_, k, _)| k).collect();
        for ((g, w), kind) in grads
            .tensors_mut()
            .into_iter()
            .zip(self.params.tensors())
            .zip(kinds)
        {
            let two_lambda = T::lit(2.0) * self.l2_coefficient(kind);
            if two_lambda == T::zero() {
                continue;
            }
            for (gv, &wv) in g.data_mut().iter_mut().zip(w.data()) {
                *gv += two_lambda * wv;
            }
        }
    }

    pub fn l2_coefficient(&self, kind: ParamKind) -> T {
        let hp = &self.hp;
        T::lit(match kind {
            ParamKind::ConvKernel => hp.cnn_l2,
            ParamKind::InputKernel => hp.kernel_l2,
            ParamKind::RecurrentKernel => hp.recurrent_l2,
            ParamKind::DenseKernel => hp.dense_l2,
            ParamKind::Bias | ParamKind::Embedding => 0.0,
        })
    }

    /// Mean cross-entropy over `batch` and its parameter gradient (no L2).
    pub fn batch_gradients(&self, batch: &[&Sample<T>], exec: Exec) -> Result<(T, ModelParams<T>)> {
        if batch.is_empty() {
            return Err(Error::EmptyInput("batch_gradients"));
        }
        let scale = T::one() / T::lit(batch.len() as f64);
        let chunks: Vec<&[&Sample<T>]> = batch.chunks(GRAD_CHUNK).collect();
        let partials = exec.map(&chunks, |chunk| -> Result<(T, ModelParams<T>)> {
            let mut grads = self.params.zeros_like();
            let mut loss = T::zero();
            for s in chunk.iter() {
                let (logits, cache) = self.forward_one(&s.input)?;
                loss += softmax_cross_entropy(&logits, s.label)?;
                let mut d = softmax_cross_entropy_grad(&logits, s.label)?;
                d.iter_mut().for_each(|v| *v *= scale);
                self.backward_one(&cache, &d, &mut grads)?;
            }
            Ok((loss, grads))
        });
        let mut total = T::zero();
        let mut grads: Option<ModelParams<T>> = None;
        for part in partials {
            let (l, g) = part?;
            total += l;
            match &mut grads {
                None => grads = Some(g),
                Some(acc) => acc.accumulate(&g),
            }
        }
        Ok((total * scale, grads.expect("non-empty batch")))
    }

    /// Mean cross-entropy and accuracy over `samples`, without gradients.
    pub fn evaluate(&self, samples: &[Sample<T>], exec: Exec) -> Result<(T, f64)> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("evaluate"));
        }
        let per = exec.map(samples, |s| -> Result<(T, bool)> {
            let logits = self.logits(&s.input)?;
            Ok((softmax_cross_entropy(&logits, s.label)?, argmax_class(&logits) == s.label))
        });
        let mut loss = T::zero();
        let mut correct = 0usize;
        for r in per {
            let (l, ok) = r?;
            loss += l;
            correct += ok as usize;
        }
        let n = samples.len() as f64;
        Ok((loss / T::lit(n), correct as f64 / n))
    }
}

pub fn argmax_class<T: Real>(logits: &[T]) -> u8 {
    let mut best = 0;
    for (i, &v) in logits.iter().enumerate().skip(1) {
        if v > logits[best] {
            best = i;
        }
    }
    best as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_hp() -> HyperParams {
        HyperParams {
            num_filters: 4,
            region_size: 3,
            rnn_units: 5,
            embedding_size: Some(6),
            ..HyperParams::default()
        }
    }

    fn features(t: usize, d: usize, active: usize, phase: f64) -> ModelInput<f64> {
        let mut mask = vec![0u8; t];
        mask[..active].iter_mut().for_each(|m| *m = 1);
        ModelInput::Features(FeatureMatrix {
            data: Tensor::from_fn(&[t, d], |i| (i as f64 * 0.37 + phase).sin()),
            mask,
        })
    }

    #[test]
    fn layer_chains() {
        let dims = InputDims::features(10, 7);
        let chain = |a| {
            build_model::<f64>(ArchitectureSpec::new(a, Representation::BertFeatures), &small_hp(), dims, 1)
                .unwrap()
                .layer_chain()
                .into_iter()
                .map(LayerKind::name)
                .collect::<Vec<_>>()
        };
        assert_eq!(chain(Architecture::CnnGru), ["conv", "localpool", "gru", "dense"]);
        assert_eq!(chain(Architecture::LstmCnn), ["lstm", "conv", "globalpool", "dense"]);
        assert_eq!(chain(Architecture::Cnn), ["conv", "globalpool", "dense"]);
        assert_eq!(chain(Architecture::Gru), ["gru", "dense"]);

        let m = build_model::<f64>(
            ArchitectureSpec::new(Architecture::LstmCnn, Representation::TrainableEmbedding),
            &small_hp(),
            InputDims::tokens(10, 30),
            1,
        )
        .unwrap();
        assert_eq!(m.layer_chain()[0], LayerKind::Embedding);
        assert_eq!(m.dense_input_dim(), 4);
    }

    #[test]
    fn conv_first_needs_room_for_pool() {
        let hp = HyperParams {
            region_size: 5,
            ..small_hp()
        };
        let spec = ArchitectureSpec::new(Architecture::CnnLstm, Representation::BertFeatures);
        assert!(matches!(
            build_model::<f64>(spec, &hp, InputDims::features(5, 3), 0),
            Err(Error::Config(_))
        ));
        assert!(build_model::<f64>(spec, &hp, InputDims::features(6, 3), 0).is_ok());
    }

    #[test]
    fn same_seed_same_parameters() {
        for spec in ArchitectureSpec::all() {
            let dims = InputDims {
                seq_len: 9,
                feature_dim: 4,
                vocab_size: 20,
            };
            let a = build_model::<f32>(spec, &small_hp(), dims, 11).unwrap();
            let b = build_model::<f32>(spec, &small_hp(), dims, 11).unwrap();
            let c = build_model::<f32>(spec, &small_hp(), dims, 12).unwrap();
            assert_eq!(a.params, b.params);
            assert_ne!(a.params, c.params);
        }
    }

    #[test]
    fn zero_dense_predicts_class_zero() {
        let spec = ArchitectureSpec::new(Architecture::GruCnn, Representation::BertFeatures);
        let mut m = build_model::<f64>(spec, &small_hp(), InputDims::features(8, 3), 3).unwrap();
        m.params.dense.weight.fill(0.0);
        m.params.dense.bias = Tensor::vector(vec![0.25, 0.25]);
        let x = features(8, 3, 5, 0.0);
        assert_eq!(m.logits(&x).unwrap(), vec![0.25, 0.25]);
        assert_eq!(m.predict(&[&x], Exec::Sequential).unwrap(), vec![0]);
    }

    #[test]
    fn batch_of_one_matches_single() {
        let spec = ArchitectureSpec::new(Architecture::CnnLstm, Representation::BertFeatures);
        let m = build_model::<f64>(spec, &small_hp(), InputDims::features(8, 3), 3).unwrap();
        let x = features(8, 3, 6, 1.0);
        let single = m.logits(&x).unwrap();
        let batch = m.forward(&[&x], Exec::default()).unwrap();
        assert_eq!(batch.shape(), &[1, 2]);
        assert_eq!(batch.data(), single.as_slice());
    }

    #[test]
    fn wrong_representation_rejected() {
        let spec = ArchitectureSpec::new(Architecture::Cnn, Representation::TrainableEmbedding);
        let m = build_model::<f64>(spec, &small_hp(), InputDims::tokens(8, 10), 3).unwrap();
        assert!(m.logits(&features(8, 6, 4, 0.0)).is_err());
    }

    #[test]
    fn l2_penalty_hand_case() {
        let spec = ArchitectureSpec::new(Architecture::Cnn, Representation::BertFeatures);
        let hp = HyperParams {
            num_filters: 1,
            region_size: 2,
            cnn_l2: 0.01,
            ..small_hp()
        };
        let mut m = Model::<f64>::zeros(spec, &hp, InputDims::features(4, 2), 0).unwrap();
        assert_eq!(m.l2_penalty(), 0.0);
        // One filter of region 2 over 2-d input: a 2x2 block of ones.
        m.params.conv.as_mut().unwrap().weight.fill(1.0);
        m.params.conv.as_mut().unwrap().bias.fill(5.0);
        assert!((m.l2_penalty() - 0.04).abs() < 1e-15);
    }

    #[test]
    fn executors_agree_bitwise() {
        let spec = ArchitectureSpec::new(Architecture::LstmCnn, Representation::BertFeatures);
        let m = build_model::<f32>(spec, &small_hp(), InputDims::features(8, 3), 5).unwrap();
        let samples: Vec<Sample<f32>> = (0..19)
            .map(|i| {
                let ModelInput::Features(f) = features(8, 3, 3 + i % 5, i as f64) else { unreachable!() };
                let f = FeatureMatrix {
                    data: f.data.cast(),
                    mask: f.mask,
                };
                Sample::new(ModelInput::Features(f), (i % 2) as u8)
            })
            .collect();
        let refs: Vec<&Sample<f32>> = samples.iter().collect();
        let (la, ga) = m.batch_gradients(&refs, Exec::Sequential).unwrap();
        let (lb, gb) = m.batch_gradients(&refs, Exec::Parallel).unwrap();
        assert_eq!(la.to_bits(), lb.to_bits());
        assert_eq!(ga, gb);
    }
}
