//! `DMF` float depth maps: a small ASCII header followed by little-endian
//! 32-bit floats.
//!
//! ```text
//! DMF
//! <width> <height>
//! <scale>
//! <width * height little-endian f32, row-major>
//! ```
//!
//! Values are normalized depth in `[0, 1]`; `scale` is the physical value of
//! 1.0 (e.g. the depth range in millimeters), or 0 when unitless. Readers
//! reject NaN, infinity, and out-of-range values outright.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{DepthMap, GridShape};

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

/// Read a `DMF` file; returns the depth map and the header scale
/// (`None` when the stored scale is 0).
pub fn read_dmf(path: &Path) -> Result<(DepthMap, Option<f64>)> {
    let bytes = fs::read(path)?;
    if bytes.is_empty() {
        return Err(parse_err(path, "empty file"));
    }
    // Header: three '\n'-terminated ASCII lines.
    let mut lines = Vec::new();
    let mut pos = 0;
    for _ in 0..3 {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| parse_err(path, "truncated header"))?;
        let line = std::str::from_utf8(&bytes[pos..pos + end])
            .map_err(|_| parse_err(path, "non-ASCII header"))?;
        lines.push(line.to_string());
        pos += end + 1;
    }
    if lines[0] != "DMF" {
        return Err(parse_err(path, "missing DMF magic"));
    }
    let dims: Vec<&str> = lines[1].split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(path, format!("bad dimension line `{}`", lines[1])));
    }
    let w: usize = dims[0]
        .parse()
        .map_err(|_| parse_err(path, format!("bad width `{}`", dims[0])))?;
    let h: usize = dims[1]
        .parse()
        .map_err(|_| parse_err(path, format!("bad height `{}`", dims[1])))?;
    let scale: f64 = lines[2]
        .trim()
        .parse()
        .map_err(|_| parse_err(path, format!("bad scale `{}`", lines[2])))?;
    if !scale.is_finite() || scale < 0.0 {
        return Err(parse_err(path, format!("scale must be finite and >= 0, got {scale}")));
    }

    let shape = GridShape::new(h, w)?;
    let n = shape.len();
    let raster = &bytes[pos..];
    if raster.len() < 4 * n {
        return Err(parse_err(path, "truncated raster"));
    }
    let mut values = Vec::with_capacity(n);
    for (i, c) in raster[..4 * n].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64;
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange(format!(
                "{}: value {v} at index {i} is not a finite depth in [0, 1]",
                path.display()
            )));
        }
        values.push(v);
    }
    let map = DepthMap::from_vec(shape, values)?;
    Ok((map, if scale == 0.0 { None } else { Some(scale) }))
}

/// Write a `DMF` file. Values are stored as f32, which round-trips
/// bit-exactly through [`read_dmf`].
pub fn write_dmf(map: &DepthMap, scale: Option<f64>, path: &Path) -> Result<()> {
    let sh = map.shape();
    let mut out = fs::File::create(path)?;
    write!(out, "DMF\n{} {}\n{}\n", sh.width, sh.height, scale.unwrap_or(0.0))?;
    let mut buf = Vec::with_capacity(4 * sh.len());
    for &v in map.values() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}
