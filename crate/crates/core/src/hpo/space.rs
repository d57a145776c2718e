use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ArchitectureSpec, HyperParams, Representation};

/// Hyperparameter names understood by [`SearchSpace`].
pub const NUM_FILTERS: &str = "num_filters";
pub const REGION_SIZE: &str = "region_size";
pub const CNN_L2: &str = "cnn_l2";
pub const RNN_UNITS: &str = "rnn_units";
pub const KERNEL_L2: &str = "kernel_l2";
pub const RECURRENT_L2: &str = "recurrent_l2";
pub const DENSE_L2: &str = "dense_l2";
pub const EMBEDDING_SIZE: &str = "embedding_size";

const FILTERS: [f64; 3] = [200.0, 250.0, 300.0];
const REGIONS: [f64; 3] = [3.0, 4.0, 5.0];
/// The region-size row as printed, `5; 4; 5`, deduplicated.
const REGIONS_AS_PRINTED: [f64; 2] = [4.0, 5.0];
const L2: [f64; 2] = [0.001, 0.01];
const UNITS: [f64; 3] = [100.0, 150.0, 200.0];
const EMBEDDING: [f64; 3] = [64.0, 100.0, 128.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    /// Sorted, deduplicated candidates.
    pub values: Vec<f64>,
}

impl Dimension {
    pub fn new(name: impl Into<String>, values: &[f64]) -> Result<Self> {
        let name = name.into();
        let mut v = values.to_vec();
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(format!("dimension {name} needs finite candidates")));
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        Ok(Dimension { name, values: v })
    }

    fn position(&self, value: f64) -> Option<usize> {
        self.values
            .iter()
            .position(|&c| (c - value).abs() <= 1e-9 * c.abs().max(1.0))
    }

    fn normalize(&self, value: f64) -> f64 {
        let (lo, hi) = (self.values[0], self.values[self.values.len() - 1]);
        if hi > lo {
            (value - lo) / (hi - lo)
        } else {
            0.0
        }
    }
}

/// Discrete grid of candidate values. Grid points are enumerated in
/// mixed-radix order with the last dimension varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub dims: Vec<Dimension>,
    /// Values used for hyperparameters outside the grid.
    pub base: HyperParams,
}

impl SearchSpace {
    pub fn new(dims: Vec<Dimension>, base: HyperParams) -> Result<Self> {
        for (i, d) in dims.iter().enumerate() {
            if dims[..i].iter().any(|o| o.name == d.name) {
                return Err(Error::Config(format!("duplicate dimension {}", d.name)));
            }
            get(&base, &d.name)?;
        }
        Ok(SearchSpace { dims, base })
    }

    /// The candidate grid for one architecture. `as_printed` uses the region
    /// sizes exactly as listed in the source table.
    pub fn for_spec(spec: ArchitectureSpec, as_printed: bool) -> Self {
        let mut dims = Vec::new();
        let d = |n: &str, v: &[f64]| Dimension::new(n, v).expect("static candidates are valid");
        if spec.kind.has_conv() {
            dims.push(d(NUM_FILTERS, &FILTERS));
            dims.push(d(REGION_SIZE, if as_printed { &REGIONS_AS_PRINTED } else { &REGIONS }));
            dims.push(d(CNN_L2, &L2));
        }
        if spec.kind.rnn_kind().is_some() {
            dims.push(d(RNN_UNITS, &UNITS));
            dims.push(d(KERNEL_L2, &L2));
            dims.push(d(RECURRENT_L2, &L2));
        }
        dims.push(d(DENSE_L2, &L2));
        let mut base = HyperParams::default();
        if spec.representation == Representation::TrainableEmbedding {
            dims.push(d(EMBEDDING_SIZE, &EMBEDDING));
        } else {
            base.embedding_size = None;
        }
        SearchSpace { dims, base }
    }

    pub fn size(&self) -> usize {
        self.dims.iter().map(|d| d.values.len()).product()
    }

    /// Candidate indices of grid point `index`.
    pub fn point(&self, index: usize) -> Result<Vec<usize>> {
        if index >= self.size() {
            return Err(Error::Config(format!("grid index {index} out of range {}", self.size())));
        }
        let mut rem = index;
        let mut out = vec![0; self.dims.len()];
        for (k, d) in self.dims.iter().enumerate().rev() {
            out[k] = rem % d.values.len();
            rem /= d.values.len();
        }
        Ok(out)
    }

    pub fn index_of(&self, point: &[usize]) -> Result<usize> {
        if point.len() != self.dims.len() {
            return Err(Error::shape("grid point", &[point.len()], &[self.dims.len()]));
        }
        let mut idx = 0;
        for (d, &p) in self.dims.iter().zip(point) {
            if p >= d.values.len() {
                return Err(Error::Config(format!("candidate {p} out of range for {}", d.name)));
            }
            idx = idx * d.values.len() + p;
        }
        Ok(idx)
    }

    pub fn config(&self, point: &[usize]) -> Result<HyperParams> {
        self.index_of(point)?;
        let mut hp = self.base.clone();
        for (d, &p) in self.dims.iter().zip(point) {
            set(&mut hp, &d.name, d.values[p])?;
        }
        Ok(hp)
    }

    pub fn config_at(&self, index: usize) -> Result<HyperParams> {
        self.config(&self.point(index)?)
    }

    /// Grid point of `hp`; errors when a value is not a candidate.
    pub fn locate(&self, hp: &HyperParams) -> Result<Vec<usize>> {
        self.dims
            .iter()
            .map(|d| {
                let v = get(hp, &d.name)?;
                d.position(v)
                    .ok_or_else(|| Error::Config(format!("{} = {v} is not a candidate of {:?}", d.name, d.values)))
            })
            .collect()
    }

    /// Min-max normalized vector of a grid point.
    pub fn encode_point(&self, point: &[usize]) -> Vec<f64> {
        self.dims
            .iter()
            .zip(point)
            .map(|(d, &p)| d.normalize(d.values[p]))
            .collect()
    }

    pub fn encode(&self, hp: &HyperParams) -> Result<Vec<f64>> {
        Ok(self.encode_point(&self.locate(hp)?))
    }

    /// Inverse of [`encode`](Self::encode), snapping each coordinate to the
    /// nearest candidate.
    pub fn decode(&self, x: &[f64]) -> Result<HyperParams> {
        if x.len() != self.dims.len() {
            return Err(Error::shape("decode", &[x.len()], &[self.dims.len()]));
        }
        let point: Vec<usize> = self
            .dims
            .iter()
            .zip(x)
            .map(|(d, &xi)| {
                let mut best = 0;
                for (k, &v) in d.values.iter().enumerate() {
                    if (d.normalize(v) - xi).abs() < (d.normalize(d.values[best]) - xi).abs() {
                        best = k;
                    }
                }
                best
            })
            .collect();
        self.config(&point)
    }
}

fn get(hp: &HyperParams, name: &str) -> Result<f64> {
    Ok(match name {
        NUM_FILTERS => hp.num_filters as f64,
        REGION_SIZE => hp.region_size as f64,
        CNN_L2 => hp.cnn_l2,
        RNN_UNITS => hp.rnn_units as f64,
        KERNEL_L2 => hp.kernel_l2,
        RECURRENT_L2 => hp.recurrent_l2,
        DENSE_L2 => hp.dense_l2,
        EMBEDDING_SIZE => hp.embedding_size.unwrap_or(0) as f64,
        _ => return Err(Error::Config(format!("unknown hyperparameter {name:?}"))),
    })
}

fn set(hp: &mut HyperParams, name: &str, v: f64) -> Result<()> {
    let as_count = || -> Result<usize> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(Error::Config(format!("{name} needs a positive integer, got {v}")))
        }
    };
    match name {
        NUM_FILTERS => hp.num_filters = as_count()?,
        REGION_SIZE => hp.region_size = as_count()?,
        CNN_L2 => hp.cnn_l2 = v,
        RNN_UNITS => hp.rnn_units = as_count()?,
        KERNEL_L2 => hp.kernel_l2 = v,
        RECURRENT_L2 => hp.recurrent_l2 = v,
        DENSE_L2 => hp.dense_l2 = v,
        EMBEDDING_SIZE => hp.embedding_size = Some(as_count()?),
        _ => return Err(Error::Config(format!("unknown hyperparameter {name:?}"))),
    }
    Ok(())
}
