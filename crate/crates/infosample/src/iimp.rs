//! Binary importance-map files.
//!
//! Layout, all little-endian:
//!
//! | bytes | field                          |
//! |-------|--------------------------------|
//! | 4     | magic `IIMP`                   |
//! | 2     | version, `1`                   |
//! | 4     | anchor rows                    |
//! | 4     | anchor columns                 |
//! | 4     | patch size `k`                 |
//! | 4     | stride                         |
//! | 4     | scale                          |
//! | 1     | metric tag                     |
//! | 4 * n | `f32` scores, row-major        |
//!
//! The zero-error sentinel is stored as the IEEE positive-infinity pattern.

use std::path::Path;

use infosample_core::{ImportanceMap, MetricKind, PatchGeometry, ScaleFactor};

use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"IIMP";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 27;

pub fn encode_map(map: &ImportanceMap) -> Vec<u8> {
    let geom = map.geometry();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * map.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for field in [map.rows(), map.cols(), geom.patch_size(), geom.stride(), geom.scale().get()] {
        out.extend_from_slice(&(field as u32).to_le_bytes());
    }
    out.push(map.metric().tag());
    for score in map.scores() {
        out.extend_from_slice(&score.to_le_bytes());
    }
    out
}

pub fn decode_map(bytes: &[u8]) -> Result<ImportanceMap> {
    let bad = |msg: &str| Error::format("IIMP", msg);
    if bytes.len() < HEADER_LEN {
        return Err(bad("truncated header"));
    }
    if bytes[..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let field = |i: usize| {
        let at = 6 + 4 * i;
        u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize
    };
    let (rows, cols, k, stride, scale) = (field(0), field(1), field(2), field(3), field(4));
    let metric = MetricKind::from_tag(bytes[26])?;
    let n = rows.checked_mul(cols).ok_or_else(|| bad("anchor count overflows"))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != n.checked_mul(4).ok_or_else(|| bad("anchor count overflows"))? {
        return Err(bad(&format!("expected {n} scores, found {} bytes", body.len())));
    }
    let scores = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    let geom = PatchGeometry::new(k, stride, ScaleFactor::new(scale)?)?;
    Ok(ImportanceMap::new(rows, cols, geom, metric, scores)?)
}

pub fn save_map(map: &ImportanceMap, path: &Path) -> Result<()> {
    std::fs::write(path, encode_map(map)).map_err(Error::io(path))
}

pub fn load_map(path: &Path) -> Result<ImportanceMap> {
    let bytes = std::fs::read(path).map_err(Error::io(path))?;
    decode_map(&bytes).map_err(|e| match e {
        Error::Format { message, .. } => Error::format(path.display().to_string(), message),
        other => other,
    })
}
