//! Named-tensor checkpoint archive.
//!
//! Layout: 8-byte magic, `u32` format version, `u64` manifest length, the
//! manifest as JSON, then every tensor's values as little-endian `f64`
//! in manifest order. All integers are little-endian.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ParamSet, Tensor};
use crate::error::{Error, Result};

pub const ARCHIVE_MAGIC: &[u8; 8] = b"SEANCKPT";
pub const ARCHIVE_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    tensors: Vec<Entry>,
    meta: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Entry {
    name: String,
    shape: Vec<usize>,
    /// Offset in values (not bytes) from the start of the data section.
    offset: usize,
}

/// Parameters plus free-form metadata (model configuration and so on).
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub params: ParamSet,
    pub meta: serde_json::Value,
}

impl Archive {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut offset = 0;
        let tensors = self
            .params
            .iter()
            .map(|(name, t)| {
                let e = Entry {
                    name: name.to_string(),
                    shape: t.shape().to_vec(),
                    offset,
                };
                offset += t.len();
                e
            })
            .collect();
        let manifest = serde_json::to_vec(&Manifest {
            tensors,
            meta: self.meta.clone(),
        })?;
        let mut out = Vec::with_capacity(20 + manifest.len() + offset * 8);
        out.extend_from_slice(ARCHIVE_MAGIC);
        out.extend_from_slice(&ARCHIVE_VERSION.to_le_bytes());
        out.extend_from_slice(&(manifest.len() as u64).to_le_bytes());
        out.extend_from_slice(&manifest);
        for (_, t) in self.params.iter() {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| Error::Format("truncated archive header".into()))?;
        if &magic != ARCHIVE_MAGIC {
            return Err(Error::Format("not a checkpoint archive".into()));
        }
        let mut u32b = [0u8; 4];
        r.read_exact(&mut u32b)
            .map_err(|_| Error::Format("truncated archive header".into()))?;
        let version = u32::from_le_bytes(u32b);
        if version != ARCHIVE_VERSION {
            return Err(Error::Format(format!("unsupported archive version {version}")));
        }
        let mut u64b = [0u8; 8];
        r.read_exact(&mut u64b)
            .map_err(|_| Error::Format("truncated archive header".into()))?;
        let len = usize::try_from(u64::from_le_bytes(u64b))
            .map_err(|_| Error::Format("manifest too large".into()))?;
        if r.len() < len {
            return Err(Error::Format("truncated manifest".into()));
        }
        let manifest: Manifest = serde_json::from_slice(&r[..len])?;
        let data = &r[len..];
        let mut params = ParamSet::new();
        for e in manifest.tensors {
            let n: usize = e.shape.iter().product();
            let start = e.offset * 8;
            let end = start + n * 8;
            if end > data.len() {
                return Err(Error::Format(format!("tensor {} extends past end of archive", e.name)));
            }
            let values = data[start..end]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            params.insert(&e.name, Tensor::new(&e.shape, values)?)?;
        }
        Ok(Archive {
            params,
            meta: manifest.meta,
        })
    }
}

pub fn write_archive(path: &Path, archive: &Archive) -> Result<()> {
    let bytes = archive.to_bytes()?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn read_archive(path: &Path) -> Result<Archive> {
    Archive::from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut params = ParamSet::new();
        params
            .insert("w", Tensor::new(&[2, 2], vec![1.5, -0.0, f64::MIN_POSITIVE, 1e300]).unwrap())
            .unwrap();
        params.insert("b", Tensor::row(vec![0.1])).unwrap();
        let a = Archive {
            params,
            meta: serde_json::json!({"m": 32}),
        };
        let bytes = a.to_bytes().unwrap();
        let back = Archive::from_bytes(&bytes).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(Archive::from_bytes(b"nope"), Err(Error::Format(_))));
        let a = Archive {
            params: ParamSet::new(),
            meta: serde_json::Value::Null,
        };
        let mut bytes = a.to_bytes().unwrap();
        bytes[8] = 9;
        assert!(matches!(Archive::from_bytes(&bytes), Err(Error::Format(_))));
    }
}
