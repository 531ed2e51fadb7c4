//! Kernel argument blobs and the layout descriptors used to copy them.
//!
//! A launch passes its arguments as an opaque byte buffer owned by the
//! caller. The buffer may be gone by the time a deferred launch actually
//! executes, so anything that defers a launch must copy the bytes out using
//! the registered layout of the kernel.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArgError {
    #[error("argument blob holds {got} bytes, layout needs {need}")]
    BlobTooShort { need: usize, got: usize },
    #[error("parameter {index} overlaps the previous parameter")]
    Overlap { index: usize },
    #[error("parameter {index} has zero size")]
    EmptyParam { index: usize },
    #[error("malformed length prefix")]
    BadPrefix,
}

/// Position of one kernel parameter inside the packed argument buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamSlot {
    pub offset: u32,
    pub size: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArgLayout {
    pub params: Vec<ParamSlot>,
}

impl ArgLayout {
    /// Packs parameters of the given sizes with natural alignment
    /// (each parameter aligned to its own size, capped at 8).
    pub fn packed(sizes: &[u32]) -> Self {
        let mut offset = 0u32;
        let params = sizes
            .iter()
            .map(|&size| {
                let align = size.clamp(1, 8).next_power_of_two();
                offset = offset.div_ceil(align) * align;
                let slot = ParamSlot { offset, size };
                offset += size;
                slot
            })
            .collect();
        Self { params }
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn total_size(&self) -> usize {
        self.params
            .iter()
            .map(|p| (p.offset + p.size) as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), ArgError> {
        let mut end = 0u32;
        for (index, p) in self.params.iter().enumerate() {
            if p.size == 0 {
                return Err(ArgError::EmptyParam { index });
            }
            if p.offset < end {
                return Err(ArgError::Overlap { index });
            }
            end = p.offset + p.size;
        }
        Ok(())
    }
}

/// Caller-owned argument bytes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArgBlob(pub Vec<u8>);

impl ArgBlob {
    pub fn new(bytes: Vec<u8>) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copies every parameter named by `layout` into a fresh buffer.
    /// Padding between parameters is zeroed rather than copied.
    pub fn deep_copy(bytes: &[u8], layout: &ArgLayout) -> Result<Self, ArgError> {
        layout.validate()?;
        let need = layout.total_size();
        if bytes.len() < need {
            return Err(ArgError::BlobTooShort {
                need,
                got: bytes.len(),
            });
        }
        let mut out = vec![0u8; need];
        for p in &layout.params {
            let range = p.offset as usize..(p.offset + p.size) as usize;
            out[range.clone()].copy_from_slice(&bytes[range]);
        }
        Ok(Self(out))
    }

    /// Bytes of parameter `index` under `layout`.
    pub fn param<'a>(&'a self, layout: &ArgLayout, index: usize) -> Option<&'a [u8]> {
        let p = layout.params.get(index)?;
        self.0.get(p.offset as usize..(p.offset + p.size) as usize)
    }

    /// Little-endian u32 length prefix followed by the bytes.
    pub fn to_prefixed(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + self.0.len());
        out.extend_from_slice(&(self.0.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.0);
        out
    }

    pub fn from_prefixed(buf: &[u8]) -> Result<Self, ArgError> {
        let (len, rest) = buf.split_first_chunk::<4>().ok_or(ArgError::BadPrefix)?;
        let len = u32::from_le_bytes(*len) as usize;
        if rest.len() != len {
            return Err(ArgError::BadPrefix);
        }
        Ok(Self(rest.to_vec()))
    }
}
