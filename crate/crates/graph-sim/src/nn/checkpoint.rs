//! Binary checkpoint format.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic            4 bytes   b"GSCK"
//! format_version   u32
//! config_hash      u64
//! manifest         4 x f64   max_speed, max_length, max_width, d_thresh
//! param_count      u32
//! per parameter:
//!   name_len       u32
//!   name           name_len bytes, UTF-8
//!   ndim           u32
//!   dims           ndim x u64
//!   values         prod(dims) x f64
//! ```

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use super::layers::Parameter;
use super::tensor::Tensor;
use crate::graph::NormalizationManifest;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"GSCK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config_hash: u64,
    pub manifest: NormalizationManifest,
    pub parameters: Vec<(String, Tensor)>,
}

impl Checkpoint {
    pub fn from_params(
        config_hash: u64,
        manifest: NormalizationManifest,
        params: &[&Parameter],
    ) -> Self {
        Checkpoint {
            config_hash,
            manifest,
            parameters: params
                .iter()
                .map(|p| (p.name.clone(), p.value.clone()))
                .collect(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(CHECKPOINT_MAGIC);
        buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.config_hash.to_le_bytes());
        for v in [
            self.manifest.max_speed,
            self.manifest.max_length,
            self.manifest.max_width,
            self.manifest.d_thresh,
        ] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&(self.parameters.len() as u32).to_le_bytes());
        for (name, tensor) in &self.parameters {
            buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
            buf.extend_from_slice(name.as_bytes());
            buf.extend_from_slice(&(tensor.shape().len() as u32).to_le_bytes());
            for d in tensor.shape() {
                buf.extend_from_slice(&(*d as u64).to_le_bytes());
            }
            for v in tensor.data() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut cursor = Cursor { bytes: &bytes, pos: 0 };
        let magic = cursor.take(4)?;
        if magic != CHECKPOINT_MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = cursor.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::UnsupportedVersion(version));
        }
        let config_hash = cursor.u64()?;
        let max_speed = cursor.f64()?;
        let max_length = cursor.f64()?;
        let max_width = cursor.f64()?;
        let d_thresh = cursor.f64()?;
        let manifest = NormalizationManifest {
            max_speed,
            max_length,
            max_width,
            d_thresh,
        };
        let count = cursor.u32()? as usize;
        let mut parameters = Vec::with_capacity(count);
        for _ in 0..count {
            let name_len = cursor.u32()? as usize;
            let name = String::from_utf8(cursor.take(name_len)?.to_vec())
                .map_err(|_| CheckpointError::Malformed("parameter name not UTF-8".into()))?;
            let ndim = cursor.u32()? as usize;
            let mut shape = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                shape.push(cursor.u64()? as usize);
            }
            let len: usize = shape.iter().product();
            let mut data = Vec::with_capacity(len);
            for _ in 0..len {
                data.push(cursor.f64()?);
            }
            let tensor = Tensor::from_vec(&shape, data)
                .map_err(|e| CheckpointError::Malformed(e.to_string()))?;
            parameters.push((name, tensor));
        }
        Ok(Checkpoint {
            config_hash,
            manifest,
            parameters,
        })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.bytes.len() {
            return Err(CheckpointError::Malformed("unexpected end of file".into()));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
