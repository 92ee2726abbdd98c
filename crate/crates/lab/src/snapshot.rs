//! Final-state snapshots.
//!
//! Little-endian layout:
//!
//! | offset | type      | content          |
//! |--------|-----------|------------------|
//! | 0      | `[u8; 4]` | magic `BFSN`     |
//! | 4      | `u32`     | format version 1 |
//! | 8      | `u64`     | `M`              |
//! | 16     | `f64`     | `L`              |
//! | 24     | `f64`     | `t`              |
//! | 32     | `[f64; M]`| samples `u(x_i)`, `x_i = -L + i 2L/M` |

use std::path::Path;

use bfamily_core::spectral::{make_grid, RealField};

use crate::{LabError, LabResult};

pub const MAGIC: [u8; 4] = *b"BFSN";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub half_length: f64,
    pub t: f64,
    pub samples: Vec<f64>,
}

impl Snapshot {
    pub fn of(field: &RealField, t: f64) -> Self {
        Self {
            half_length: field.grid().half_length(),
            t,
            samples: field.samples().to_vec(),
        }
    }

    pub fn to_field(&self) -> LabResult<RealField> {
        let grid = make_grid(self.half_length, self.samples.len())?;
        Ok(RealField::new(&grid, self.samples.clone())?)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.samples.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.samples.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.half_length.to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        for v in &self.samples {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, String> {
        if bytes.len() < HEADER_LEN {
            return Err(format!("{} bytes is shorter than the header", bytes.len()));
        }
        if bytes[..4] != MAGIC {
            return Err("bad magic".into());
        }
        let word = |i: usize| -> [u8; 8] { bytes[i..i + 8].try_into().expect("8 bytes") };
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(format!("unsupported version {version}"));
        }
        let m = u64::from_le_bytes(word(8)) as usize;
        let half_length = f64::from_le_bytes(word(16));
        let t = f64::from_le_bytes(word(24));
        let expected = m
            .checked_mul(8)
            .and_then(|n| n.checked_add(HEADER_LEN))
            .ok_or("sample count overflows")?;
        if bytes.len() != expected {
            return Err(format!("expected {expected} bytes for M = {m}, found {}", bytes.len()));
        }
        let samples = (0..m).map(|i| f64::from_le_bytes(word(HEADER_LEN + 8 * i))).collect();
        Ok(Self { half_length, t, samples })
    }

    pub fn write(&self, path: &Path) -> LabResult<()> {
        std::fs::write(path, self.encode()).map_err(LabError::io(path))
    }

    pub fn read(path: &Path) -> LabResult<Self> {
        let bytes = std::fs::read(path).map_err(LabError::io(path))?;
        Self::decode(&bytes).map_err(|reason| LabError::Snapshot {
            path: path.to_path_buf(),
            reason,
        })
    }
}
