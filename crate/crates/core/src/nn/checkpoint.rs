//! Flat binary model checkpoints.
//!
//! ```text
//! offset  size    field (little-endian)
//! 0       4       magic "TRNM"
//! 4       4       version (u32, currently 1)
//! 8       4       variant (0 treernn, 1 mlponly, 2 conv2d, 3 rowrnn)
//! 12      4       pooling (0 final row, 1 all steps)
//! 16      4       input channels
//! 20      4       classes
//! 24      4       hidden width
//! 28      8       seed (u64)
//! 36      8       parameter count (u64)
//! 44      8 * P   parameters (f64) in block declaration order
//! ```

use std::fs;
use std::path::Path;

use super::model::{layout, Model, Pooling, Variant, HIDDEN};
use crate::error::{Error, Result};

const MAGIC: [u8; 4] = *b"TRNM";
const VERSION: u32 = 1;
const HEADER: usize = 44;

pub fn encode_checkpoint(m: &Model) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + 8 * m.params.len());
    out.extend_from_slice(&MAGIC);
    for v in [VERSION, m.variant.code(), m.pooling.code(), m.input_channels as u32, m.classes as u32, HIDDEN as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&m.seed.to_le_bytes());
    out.extend_from_slice(&(m.params.len() as u64).to_le_bytes());
    for p in &m.params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Model> {
    let bad = |msg: &str| Error::Cache(format!("checkpoint: {msg}"));
    if bytes.len() < HEADER || bytes[..4] != MAGIC {
        return Err(bad("missing or truncated header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let long = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    if word(4) != VERSION {
        return Err(Error::CacheVersion { found: word(4), expected: VERSION });
    }
    let variant = Variant::from_code(word(8)).ok_or_else(|| bad("unknown variant"))?;
    let pooling = match word(12) {
        0 => Pooling::FinalRow,
        1 => Pooling::AllSteps,
        _ => return Err(bad("unknown pooling")),
    };
    let (input_channels, classes) = (word(16) as usize, word(20) as usize);
    if word(24) as usize != HIDDEN {
        return Err(bad("hidden width differs from this build"));
    }
    let blocks = layout(variant, input_channels, classes);
    let count = blocks.last().map_or(0, |b| b.offset + b.len());
    if long(36) != count as u64 || bytes.len() != HEADER + 8 * count {
        return Err(bad("parameter count does not match the declared shapes"));
    }
    let params = bytes[HEADER..].chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
    Ok(Model { variant, pooling, input_channels, classes, seed: long(28), params, blocks })
}

pub fn save_checkpoint(path: &Path, m: &Model) -> Result<()> {
    fs::write(path, encode_checkpoint(m)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Model> {
    decode_checkpoint(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
