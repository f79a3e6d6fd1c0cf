//! Binary kernel cache.
//!
//! Layout: 4-byte magic `SE2K`, little-endian `u32` length of the JSON
//! header, the UTF-8 JSON header, then `n_theta · n_y · n_x` little-endian
//! `f64` values in (θ-major, y, x) order.

use super::{FpParams, GridSpec, KernelGrid, Normalization};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const CACHE_MAGIC: [u8; 4] = *b"SE2K";
pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    n_x: usize,
    n_y: usize,
    n_theta: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
    theta_period: f64,
    normalization: Normalization,
    symmetrized: bool,
    smoothing: Option<(f64, f64, f64)>,
    source_params: Option<FpParams>,
    /// Free-form run metadata (resolved configuration etc.).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

pub fn write_grid(grid: &KernelGrid, metadata: Option<serde_json::Value>, mut writer: impl Write) -> Result<()> {
    let s = grid.spec();
    let header = Header {
        format_version: CACHE_FORMAT_VERSION,
        n_x: s.n_x,
        n_y: s.n_y,
        n_theta: s.n_theta,
        x_range: s.x_range,
        y_range: s.y_range,
        theta_period: s.theta_period,
        normalization: grid.normalization,
        symmetrized: grid.symmetrized,
        smoothing: grid.smoothing,
        source_params: grid.source_params,
        metadata,
    };
    let json = serde_json::to_vec(&header)?;
    let len = u32::try_from(json.len()).map_err(|_| Error::Format("cache header too large".into()))?;
    writer.write_all(&CACHE_MAGIC)?;
    writer.write_all(&len.to_le_bytes())?;
    writer.write_all(&json)?;
    let mut body = Vec::with_capacity(grid.values().len() * 8);
    for v in grid.values() {
        body.extend_from_slice(&v.to_le_bytes());
    }
    writer.write_all(&body)?;
    Ok(())
}

/// Reads a cache file, returning the grid and any embedded metadata.
pub fn read_grid(mut reader: impl Read) -> Result<(KernelGrid, Option<serde_json::Value>)> {
    let mut prefix = [0u8; 8];
    reader.read_exact(&mut prefix)?;
    if prefix[..4] != CACHE_MAGIC {
        return Err(Error::Format("not a kernel cache (bad magic)".into()));
    }
    let len = u32::from_le_bytes(prefix[4..].try_into().expect("4 bytes")) as usize;
    let mut json = vec![0u8; len];
    reader.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json)?;
    if header.format_version != CACHE_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported cache version {}",
            header.format_version
        )));
    }
    let spec = GridSpec {
        n_x: header.n_x,
        n_y: header.n_y,
        n_theta: header.n_theta,
        x_range: header.x_range,
        y_range: header.y_range,
        theta_period: header.theta_period,
    };
    spec.validate()?;
    let mut body = vec![0u8; spec.len() * 8];
    reader.read_exact(&mut body)?;
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let mut grid = KernelGrid::from_values(spec, values)?;
    grid.normalization = header.normalization;
    grid.symmetrized = header.symmetrized;
    grid.smoothing = header.smoothing;
    grid.source_params = header.source_params;
    Ok((grid, header.metadata))
}
