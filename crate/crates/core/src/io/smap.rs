//! SMAP v1: `"SMAP"`, version byte `1`, height and width as little-endian
//! `u32`, then `height × width` little-endian `f32` values, row-major.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::SaliencyMap;

pub const MAGIC: &[u8; 4] = b"SMAP";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 13;

/// Encodes `map`, narrowing values to `f32`.
pub fn encode_smap(map: &SaliencyMap) -> Vec<u8> {
    let (h, w) = map.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * h * w);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(h as u32).to_le_bytes());
    out.extend_from_slice(&(w as u32).to_le_bytes());
    for &v in map.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

/// Raw header and payload; sign and finiteness are checked by the caller.
pub(crate) fn decode_smap(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    let format = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(format("missing SMAP header".into()));
    }
    if bytes[4] != VERSION {
        return Err(format(format!("unsupported SMAP version {}", bytes[4])));
    }
    let h = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let w = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    if h == 0 || w == 0 {
        return Err(format(format!("empty grid {h}x{w}")));
    }
    let expected = h
        .checked_mul(w)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| format(format!("grid {h}x{w} is too large")))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(format(format!(
            "payload is {} bytes, header implies {expected}",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok((h, w, values))
}
