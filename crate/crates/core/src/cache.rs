//! Binary cache of projected images.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! offset  size        field
//! 0       4           magic "TRIC"
//! 4       4           format version (u32, currently 1)
//! 8       4           height H (u32)
//! 12      4           width W (u32)
//! 16      4           channels C (u32)
//! 20      4           image count N (u32)
//! 24      12 * N      per image: class (u32), graph id (u32), variant (u32)
//! ...     4*H*W*C*N   pixels (f32), row-major [image][row][col][channel]
//! ```
//!
//! The header is the fixed 24 bytes plus the label table. Occupancy is not
//! stored: a pixel is occupied exactly when one of its channels is non-zero.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::projection::GraphImage;

pub const MAGIC: [u8; 4] = *b"TRIC";
pub const VERSION: u32 = 1;
pub const FIXED_HEADER_BYTES: usize = 24;
pub const LABEL_BYTES: usize = 12;

/// Per-image metadata stored next to the pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImageLabel {
    pub class: u32,
    pub graph_id: u32,
    /// 0 for the canonical projection, `1..k` for augmented copies.
    pub variant: u32,
}

pub fn encode_image_cache(images: &[GraphImage], labels: &[ImageLabel]) -> Result<Vec<u8>> {
    if images.len() != labels.len() {
        return Err(Error::InvalidArgument(format!("{} images but {} labels", images.len(), labels.len())));
    }
    let (h, w, c) = images.first().map_or((0, 0, 0), |i| (i.height(), i.width(), i.channels()));
    if let Some(bad) = images.iter().find(|i| (i.height(), i.width(), i.channels()) != (h, w, c)) {
        return Err(Error::Shape(format!("image {}x{}x{} differs from {h}x{w}x{c}", bad.height(), bad.width(), bad.channels())));
    }
    let to_u32 = |x: usize, what: &str| u32::try_from(x).map_err(|_| Error::InvalidArgument(format!("{what} {x} exceeds u32")));
    let mut out = Vec::with_capacity(FIXED_HEADER_BYTES + images.len() * (LABEL_BYTES + 4 * h * w * c));
    out.extend_from_slice(&MAGIC);
    for v in [VERSION, to_u32(h, "height")?, to_u32(w, "width")?, to_u32(c, "channels")?, to_u32(images.len(), "count")?] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for l in labels {
        for v in [l.class, l.graph_id, l.variant] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    for img in images {
        for p in img.pixels() {
            out.extend_from_slice(&p.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_image_cache(bytes: &[u8]) -> Result<(Vec<GraphImage>, Vec<ImageLabel>)> {
    if bytes.len() < FIXED_HEADER_BYTES {
        return Err(Error::Cache(format!("truncated header: {} bytes", bytes.len())));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(Error::CacheVersion { found: version, expected: VERSION });
    }
    let (h, w, c, n) = (word(8) as usize, word(12) as usize, word(16) as usize, word(20) as usize);
    let per_image = h * w * c;
    let expected = FIXED_HEADER_BYTES + n * (LABEL_BYTES + 4 * per_image);
    if bytes.len() != expected {
        return Err(Error::Cache(format!("expected {expected} bytes for {n} images of {h}x{w}x{c}, found {}", bytes.len())));
    }
    let labels = (0..n)
        .map(|i| {
            let at = FIXED_HEADER_BYTES + i * LABEL_BYTES;
            ImageLabel { class: word(at), graph_id: word(at + 4), variant: word(at + 8) }
        })
        .collect();
    let payload = &bytes[FIXED_HEADER_BYTES + n * LABEL_BYTES..];
    let images = (0..n)
        .map(|i| {
            let block = &payload[i * per_image * 4..(i + 1) * per_image * 4];
            let pixels = block.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
            GraphImage::from_pixels(h, w, c, pixels)
        })
        .collect::<Result<_>>()?;
    Ok((images, labels))
}

pub fn write_image_cache(path: &Path, images: &[GraphImage], labels: &[ImageLabel]) -> Result<()> {
    let bytes = encode_image_cache(images, labels)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_image_cache(path: &Path) -> Result<(Vec<GraphImage>, Vec<ImageLabel>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image_cache(&bytes)
}
