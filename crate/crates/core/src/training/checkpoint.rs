//! Binary checkpoint format, all integers and reals little-endian:
//!
//! ```text
//! "PSEQ" | version u8 (=1) | kind u8 (1 lstm, 2 gru, 3 cnn1d)
//! input u32 | hidden u32 | layers u32 | kernel u32 | seq_len u32 | dropout_p f32
//! tensor_count u32
//! per tensor: name_len u32 | name (UTF-8) | rank u32 | dims u32 * rank | data f32 * prod(dims)
//! best_val_auc f64 | seed u64 | epoch u32
//! ```
//!
//! Recurrent weights are stored `[hidden + input, gates * hidden]` with
//! gate column blocks ordered (forget, input, candidate, output) for LSTM and
//! (reset, update, candidate) for GRU; conv weights are `[out, in, kernel]`.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::{Model, ModelConfig, ModelKind};

pub const MAGIC: &[u8; 4] = b"PSEQ";
pub const VERSION: u8 = 0x01;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: Model<f32>,
    pub best_val_auc: f64,
    pub seed: u64,
    /// 1-based epoch the parameters were captured at; 0 if never trained.
    pub epoch: usize,
}

impl Checkpoint {
    pub fn untrained(model: Model<f32>) -> Self {
        Checkpoint {
            model,
            best_val_auc: 0.0,
            seed: 0,
            epoch: 0,
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.model.config
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let c = &self.model.config;
        let mut out = Vec::with_capacity(64 + self.model.num_params() * 4);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(c.kind.code());
        for v in [c.input_size, c.hidden, c.layers, c.kernel, c.seq_len] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        out.extend_from_slice(&c.dropout_p.to_le_bytes());
        let tensors = self.model.tensors();
        out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
        for t in &tensors {
            out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
            out.extend_from_slice(t.name.as_bytes());
            out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
            for &d in &t.shape {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for v in t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out.extend_from_slice(&self.best_val_auc.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&(self.epoch as u32).to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        r.pos = 4;
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::VersionMismatch(version));
        }
        let kind = ModelKind::from_code(r.u8()?)?;
        let config = ModelConfig {
            kind,
            input_size: r.u32()? as usize,
            hidden: r.u32()? as usize,
            layers: r.u32()? as usize,
            kernel: r.u32()? as usize,
            seq_len: r.u32()? as usize,
            dropout_p: f32::from_le_bytes(r.array()?),
        };
        let count = r.u32()? as usize;
        let mut tensors = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let name_len = r.u32()? as usize;
            let name = String::from_utf8(r.take(name_len)?.to_vec())
                .map_err(|_| Error::shape("tensor name is not UTF-8"))?;
            let rank = r.u32()? as usize;
            let mut shape = Vec::with_capacity(rank.min(8));
            for _ in 0..rank {
                shape.push(r.u32()? as usize);
            }
            let n: usize = shape.iter().product();
            let raw = r.take(n.checked_mul(4).ok_or(Error::TruncatedFile)?)?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            tensors.push((name, shape, data));
        }
        let best_val_auc = f64::from_le_bytes(r.array()?);
        let seed = u64::from_le_bytes(r.array()?);
        let epoch = r.u32()? as usize;
        if r.pos != bytes.len() {
            return Err(Error::InvalidConfig(format!(
                "{} unexpected trailing bytes",
                bytes.len() - r.pos
            )));
        }
        let model = Model::from_tensors(config, tensors)?;
        Ok(Checkpoint {
            model,
            best_val_auc,
            seed,
            epoch,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::TruncatedFile)?;
        let s = self.bytes.get(self.pos..end).ok_or(Error::TruncatedFile)?;
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
}

/// Writes `contents` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    write_atomic(path, &ckpt.to_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::from_bytes(&fs::read(path)?)
}
