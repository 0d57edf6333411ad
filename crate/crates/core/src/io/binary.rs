//! Little-endian binary containers.
//!
//! Tensor file: `PTK1`, version u32, rank u32, rank x dim u32, f32 values.
//!
//! Model file: `PTKM`, version u32, loss u32, input rank u32 + dims, layer
//! count u32, then per layer a kind u32, its configuration, a parameter count
//! u32 and that many f32 values.

use std::path::Path;

use super::{read_file, write_file};
use crate::error::{Error, Result};
use crate::nn::{Activation, LayerSpec, LossKind, Network, Tensor};

const TENSOR_MAGIC: &[u8; 4] = b"PTK1";
const MODEL_MAGIC: &[u8; 4] = b"PTKM";
const VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u32(u32::try_from(v).expect("dimension fits in u32"));
    }
    fn f32(&mut self, v: f32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::TruncatedFile(self.path.to_path_buf()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn usize(&mut self) -> Result<usize> {
        Ok(self.u32()? as usize)
    }
    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let raw = self.take(n.checked_mul(4).ok_or_else(|| Error::TruncatedFile(self.path.to_path_buf()))?)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect())
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn magic(&mut self, want: &[u8; 4]) -> Result<()> {
        if self.bytes.len() < 4 || &self.bytes[..4] != want {
            return Err(Error::BadMagic(self.path.to_path_buf()));
        }
        self.pos = 4;
        let version = self.u32()?;
        if version != VERSION {
            return Err(Error::Config(format!(
                "{}: unsupported format version {version}",
                self.path.display()
            )));
        }
        Ok(())
    }
    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Config(format!(
                "{}: {} trailing bytes",
                self.path.display(),
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

pub fn encode_tensor(t: &Tensor<f32>) -> Vec<u8> {
    let mut w = Writer(Vec::with_capacity(12 + 4 * (t.rank() + t.len())));
    w.0.extend_from_slice(TENSOR_MAGIC);
    w.u32(VERSION);
    w.usize(t.rank());
    for &d in t.shape() {
        w.usize(d);
    }
    for &v in t.data() {
        w.f32(v);
    }
    w.0
}

/// `path` is only used to label errors.
pub fn decode_tensor(bytes: &[u8], path: &Path) -> Result<Tensor<f32>> {
    let mut r = Reader { bytes, pos: 0, path };
    r.magic(TENSOR_MAGIC)?;
    let rank = r.usize()?;
    let shape = (0..rank).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::TruncatedFile(path.to_path_buf()))?;
    let data = r.f32s(count)?;
    r.finish()?;
    Tensor::from_vec(&shape, data)
}

pub fn save_tensor(path: &Path, t: &Tensor<f32>) -> Result<()> {
    write_file(path, &encode_tensor(t))
}

pub fn load_tensor(path: &Path) -> Result<Tensor<f32>> {
    decode_tensor(&read_file(path)?, path)
}

const KIND_DENSE: u32 = 0;
const KIND_CONV: u32 = 1;
const KIND_POOL: u32 = 2;
const KIND_DROPOUT: u32 = 3;
const KIND_LSTM: u32 = 4;
const KIND_STANDARDIZE: u32 = 5;

pub fn save_model(path: &Path, net: &Network<f32>) -> Result<()> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MODEL_MAGIC);
    w.u32(VERSION);
    w.u32(net.loss().code());
    w.usize(net.input_shape().len());
    for &d in net.input_shape() {
        w.usize(d);
    }
    w.usize(net.layers().len());
    for layer in net.layers() {
        match layer.spec() {
            LayerSpec::Dense { units, activation } => {
                w.u32(KIND_DENSE);
                w.usize(units);
                w.u32(activation.code());
            }
            LayerSpec::Conv2d {
                filters,
                kernel,
                activation,
            } => {
                w.u32(KIND_CONV);
                w.usize(filters);
                w.usize(kernel);
                w.u32(activation.code());
            }
            LayerSpec::MaxPool2d => w.u32(KIND_POOL),
            LayerSpec::Dropout { rate } => {
                w.u32(KIND_DROPOUT);
                w.f64(rate);
            }
            LayerSpec::Lstm {
                units,
                return_sequences,
                mask_value,
            } => {
                w.u32(KIND_LSTM);
                w.usize(units);
                w.u32(u32::from(return_sequences));
                w.f64(mask_value);
            }
            LayerSpec::Standardize {
                shift,
                scale,
                mask_value,
            } => {
                w.u32(KIND_STANDARDIZE);
                w.usize(shift.len());
                shift.iter().chain(&scale).for_each(|&v| w.f64(v));
                w.u32(u32::from(mask_value.is_some()));
                w.f64(mask_value.unwrap_or(0.0));
            }
        }
        let params = layer.params().map(|p| p.values.as_slice()).unwrap_or(&[]);
        w.usize(params.len());
        for &v in params {
            w.f32(v);
        }
    }
    write_file(path, &w.0)
}

fn bad(path: &Path, what: &str) -> Error {
    Error::Config(format!("{}: {what}", path.display()))
}

pub fn load_model(path: &Path) -> Result<Network<f32>> {
    let bytes = read_file(path)?;
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
        path,
    };
    r.magic(MODEL_MAGIC)?;
    let loss = LossKind::from_code(r.u32()?).ok_or_else(|| bad(path, "unknown loss"))?;
    let rank = r.usize()?;
    let input = (0..rank).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
    let count = r.usize()?;
    let mut specs = Vec::new();
    let mut params = Vec::new();
    let activation = |c: u32| Activation::from_code(c).ok_or_else(|| bad(path, "unknown activation"));
    for _ in 0..count {
        let spec = match r.u32()? {
            KIND_DENSE => LayerSpec::Dense {
                units: r.usize()?,
                activation: activation(r.u32()?)?,
            },
            KIND_CONV => LayerSpec::Conv2d {
                filters: r.usize()?,
                kernel: r.usize()?,
                activation: activation(r.u32()?)?,
            },
            KIND_POOL => LayerSpec::MaxPool2d,
            KIND_DROPOUT => LayerSpec::Dropout { rate: r.f64()? },
            KIND_LSTM => LayerSpec::Lstm {
                units: r.usize()?,
                return_sequences: r.u32()? != 0,
                mask_value: r.f64()?,
            },
            KIND_STANDARDIZE => {
                let n = r.usize()?;
                let shift = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
                let scale = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
                let has_mask = r.u32()? != 0;
                let mask = r.f64()?;
                LayerSpec::Standardize {
                    shift,
                    scale,
                    mask_value: has_mask.then_some(mask),
                }
            }
            _ => return Err(bad(path, "unknown layer kind")),
        };
        let n = r.usize()?;
        params.extend(r.f32s(n)?);
        specs.push(spec);
    }
    r.finish()?;
    let mut net = Network::build(&input, &specs, loss, 0)?;
    net.set_parameters(&params)
        .map_err(|_| bad(path, "parameter count does not match the architecture"))?;
    Ok(net)
}
