//! Encoded feature matrices and the `BFC1` feature cache.
//!
//! Cache layout (little-endian):
//!
//! ```text
//! b"BFC1"
//! u32 record count, u32 L, u32 H
//! per record: u8 label, u32 mask popcount, [f32; L*H] row-major
//! ```
//!
//! Masks are prefix masks (`[CLS] ... [SEP]` then padding), so the popcount
//! is enough to rebuild them.

use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::Encoder;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::tensor::{Real, Tensor};
use crate::text::TokenizedExample;

pub const MAGIC: &[u8; 4] = b"BFC1";

/// `L x H` contextual representation of one text plus its padding mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    pub data: Tensor<T>,
    pub mask: Vec<u8>,
}

impl<T: Real> FeatureMatrix<T> {
    pub fn seq_len(&self) -> usize {
        self.data.rows()
    }

    pub fn hidden(&self) -> usize {
        self.data.cols()
    }

    pub fn active_len(&self) -> usize {
        self.mask.iter().filter(|&&m| m == 1).count()
    }

    /// Mean of the unmasked rows; a fixed-size summary used for plots.
    pub fn mean_pooled(&self) -> Vec<T> {
        let h = self.hidden();
        let mut out = vec![T::zero(); h];
        let mut n = 0usize;
        for (i, &m) in self.mask.iter().enumerate() {
            if m == 1 {
                n += 1;
                for (o, &v) in out.iter_mut().zip(self.data.row(i)) {
                    *o += v;
                }
            }
        }
        if n > 0 {
            let inv = T::one() / T::lit(n as f64);
            out.iter_mut().for_each(|o| *o *= inv);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub label: u8,
    pub active: u32,
    pub data: Vec<f32>,
}

impl FeatureRecord {
    pub fn to_matrix<T: Real>(&self, seq_len: usize, hidden: usize) -> Result<FeatureMatrix<T>> {
        let mut mask = vec![1u8; (self.active as usize).min(seq_len)];
        mask.resize(seq_len, 0);
        Ok(FeatureMatrix {
            data: Tensor::new(
                &[seq_len, hidden],
                self.data.iter().map(|&x| T::lit(x as f64)).collect(),
            )?,
            mask,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCache {
    pub seq_len: usize,
    pub hidden: usize,
    pub records: Vec<FeatureRecord>,
}

fn write_header(w: &mut impl Write, count: usize, seq_len: usize, hidden: usize) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(count as u32).to_le_bytes())?;
    w.write_all(&(seq_len as u32).to_le_bytes())?;
    w.write_all(&(hidden as u32).to_le_bytes())
}

fn write_record(w: &mut impl Write, label: u8, active: u32, data: &[f32]) -> std::io::Result<()> {
    w.write_all(&[label])?;
    w.write_all(&active.to_le_bytes())?;
    let mut buf = Vec::with_capacity(data.len() * 4);
    for &x in data {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)
}

impl FeatureCache {
    pub fn matrices<T: Real>(&self) -> Result<Vec<(FeatureMatrix<T>, u8)>> {
        self.records
            .iter()
            .map(|r| Ok((r.to_matrix(self.seq_len, self.hidden)?, r.label)))
            .collect()
    }

    /// Like [`matrices`](Self::matrices) but frees each record as it is
    /// converted, so large caches are never held twice.
    pub fn into_matrices<T: Real>(self) -> Result<Vec<(FeatureMatrix<T>, u8)>> {
        let (seq_len, hidden) = (self.seq_len, self.hidden);
        self.records
            .into_iter()
            .map(|r| Ok((r.to_matrix(seq_len, hidden)?, r.label)))
            .collect()
    }

    pub fn from_matrices<T: Real>(items: &[(FeatureMatrix<T>, u8)]) -> Result<Self> {
        let (seq_len, hidden) = items
            .first()
            .map(|(m, _)| (m.seq_len(), m.hidden()))
            .unwrap_or((0, 0));
        let mut records = Vec::with_capacity(items.len());
        for (m, label) in items {
            if m.seq_len() != seq_len || m.hidden() != hidden {
                return Err(Error::shape("feature cache", &[seq_len, hidden], m.data.shape()));
            }
            records.push(FeatureRecord {
                label: *label,
                active: m.active_len() as u32,
                data: m.data.data().iter().map(|&x| x.as_f64() as f32).collect(),
            });
        }
        Ok(FeatureCache {
            seq_len,
            hidden,
            records,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        let io = |e| Error::io(path, e);
        write_header(&mut w, self.records.len(), self.seq_len, self.hidden).map_err(io)?;
        for r in &self.records {
            if r.data.len() != self.seq_len * self.hidden {
                return Err(Error::format("BFC1", "record size does not match header"));
            }
            write_record(&mut w, r.label, r.active, &r.data).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn from_reader(mut r: impl Read) -> Result<Self> {
        let mut head = [0u8; 16];
        read_exact(&mut r, &mut head)?;
        if &head[..4] != MAGIC {
            return Err(Error::format("BFC1", format!("bad magic {:?}", &head[..4])));
        }
        let word = |i: usize| u32::from_le_bytes([head[i], head[i + 1], head[i + 2], head[i + 3]]) as usize;
        let (count, seq_len, hidden) = (word(4), word(8), word(12));
        let mut records = Vec::with_capacity(count.min(1 << 16));
        let mut raw = vec![0u8; seq_len * hidden * 4];
        for _ in 0..count {
            let mut rh = [0u8; 5];
            read_exact(&mut r, &mut rh)?;
            read_exact(&mut r, &mut raw)?;
            records.push(FeatureRecord {
                label: rh[0],
                active: u32::from_le_bytes([rh[1], rh[2], rh[3], rh[4]]),
                data: raw
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                    .collect(),
            });
        }
        Ok(FeatureCache {
            seq_len,
            hidden,
            records,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(f))
    }
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::format("BFC1", format!("truncated: {e}")))
}

/// Encodes every example once and streams the records to `path` in input
/// order. Examples are encoded `chunk` at a time through `exec`.
pub fn extract_features<T: Real>(
    dataset: &[(TokenizedExample, u8)],
    encoder: &Encoder<T>,
    path: &Path,
    exec: Exec,
) -> Result<()> {
    let seq_len = dataset.first().map(|(e, _)| e.len()).unwrap_or(0);
    if let Some((bad, _)) = dataset.iter().find(|(e, _)| e.len() != seq_len) {
        return Err(Error::shape("extract_features", &[seq_len], &[bad.len()]));
    }
    let hidden = encoder.config.hidden;
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let io = |e| Error::io(path, e);
    write_header(&mut w, dataset.len(), seq_len, hidden).map_err(io)?;

    const CHUNK: usize = 64;
    for chunk in dataset.chunks(CHUNK) {
        let encoded = exec.map(chunk, |(ex, label)| {
            encoder.encode(ex).map(|m| {
                let data: Vec<f32> = m.data.data().iter().map(|&x| x.as_f64() as f32).collect();
                (*label, m.active_len() as u32, data)
            })
        });
        for item in encoded {
            let (label, active, data) = item?;
            write_record(&mut w, label, active, &data).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}
