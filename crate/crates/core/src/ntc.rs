//! `NTC1` named-tensor container, used for encoder weights and classifier
//! checkpoints.
//!
//! Layout (little-endian):
//!
//! ```text
//! b"NTC1"
//! u32                 tensor count
//! per tensor:
//!   u16               name length in bytes
//!   [u8]              UTF-8 name
//!   u8                rank
//!   [u32; rank]       dims
//!   [f32; prod(dims)] row-major payload
//! ```

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor};

pub const MAGIC: &[u8; 4] = b"NTC1";

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

/// Ordered collection of named float32 tensors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NamedTensors {
    entries: Vec<NamedTensor>,
    index: HashMap<String, usize>,
}

impl NamedTensors {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &NamedTensor> {
        self.entries.iter()
    }

    pub fn insert(&mut self, name: impl Into<String>, shape: Vec<usize>, data: Vec<f32>) -> Result<()> {
        let name = name.into();
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::DataLength { shape, len: data.len() });
        }
        if name.len() > u16::MAX as usize {
            return Err(Error::format("NTC1", format!("tensor name too long: {}", name.len())));
        }
        if shape.len() > u8::MAX as usize {
            return Err(Error::format("NTC1", "rank above 255"));
        }
        let entry = NamedTensor {
            name: name.clone(),
            shape,
            data,
        };
        match self.index.get(&name) {
            Some(&i) => self.entries[i] = entry,
            None => {
                self.index.insert(name, self.entries.len());
                self.entries.push(entry);
            }
        }
        Ok(())
    }

    pub fn insert_tensor<T: Real>(&mut self, name: impl Into<String>, t: &Tensor<T>) -> Result<()> {
        let data = t.data().iter().map(|&x| x.as_f64() as f32).collect();
        self.insert(name, t.shape().to_vec(), data)
    }

    pub fn get(&self, name: &str) -> Option<&NamedTensor> {
        self.index.get(name).map(|&i| &self.entries[i])
    }

    /// Fetches `name` as a tensor of exactly `shape`.
    pub fn tensor<T: Real>(&self, name: &str, shape: &[usize]) -> Result<Tensor<T>> {
        let e = self.get(name).ok_or_else(|| Error::MissingWeight(name.to_string()))?;
        if e.shape != shape {
            return Err(Error::Config(format!(
                "tensor {name:?} has shape {:?}, expected {shape:?}",
                e.shape
            )));
        }
        Tensor::new(shape, e.data.iter().map(|&x| T::lit(x as f64)).collect())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for e in &self.entries {
            out.extend_from_slice(&(e.name.len() as u16).to_le_bytes());
            out.extend_from_slice(e.name.as_bytes());
            out.push(e.shape.len() as u8);
            for &d in &e.shape {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for &x in &e.data {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_reader(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::format("NTC1", format!("bad magic {magic:?}")));
        }
        let count = read_u32(&mut r)?;
        let mut out = NamedTensors::new();
        for _ in 0..count {
            let mut len = [0u8; 2];
            read_exact(&mut r, &mut len)?;
            let mut name = vec![0u8; u16::from_le_bytes(len) as usize];
            read_exact(&mut r, &mut name)?;
            let name = String::from_utf8(name).map_err(|e| Error::format("NTC1", e.to_string()))?;
            let mut rank = [0u8; 1];
            read_exact(&mut r, &mut rank)?;
            let mut shape = Vec::with_capacity(rank[0] as usize);
            for _ in 0..rank[0] {
                shape.push(read_u32(&mut r)? as usize);
            }
            let n: usize = shape.iter().product();
            let mut raw = vec![0u8; n * 4];
            read_exact(&mut r, &mut raw)?;
            let data = raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            out.insert(name, shape, data)?;
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing).map_err(|e| Error::format("NTC1", e.to_string()))? != 0 {
            return Err(Error::format("NTC1", "trailing bytes after last tensor"));
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(f))
    }
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::format("NTC1", format!("truncated: {e}")))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}
