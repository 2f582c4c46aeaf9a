//! Binary netpbm readers and writers: P5 graymaps (8- and 16-bit) and
//! P6 pixmaps (24-bit RGB).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

/// Reads the ASCII header: magic, width, height, maxval, then returns the
/// offset of the first raster byte. `#` comments are allowed between tokens.
fn parse_header(bytes: &[u8], path: &Path, magic: &str) -> Result<(usize, usize, u32, usize)> {
    if bytes.is_empty() {
        return Err(parse_err(path, "empty file"));
    }
    if bytes.len() < 2 || &bytes[0..2] != magic.as_bytes() {
        return Err(parse_err(path, format!("missing {magic} magic header")));
    }
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and comments.
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err(parse_err(path, "truncated header"));
        }
        let token = std::str::from_utf8(&bytes[start..pos]).unwrap();
        *field = token
            .parse()
            .map_err(|_| parse_err(path, format!("bad header token `{token}`")))?;
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(parse_err(path, "missing raster separator"));
    }
    pos += 1;
    let (w, h, maxval) = (fields[0] as usize, fields[1] as usize, fields[2] as u32);
    if w == 0 || h == 0 {
        return Err(parse_err(path, format!("zero dimension {w}x{h}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(parse_err(path, format!("unsupported maxval {maxval}")));
    }
    Ok((w, h, maxval, pos))
}

/// Read a binary PGM (P5). Returns `(width, height, maxval, samples)`;
/// samples are 16-bit big-endian when `maxval > 255`.
pub fn read_pgm(path: &Path) -> Result<(usize, usize, u32, Vec<u32>)> {
    let bytes = fs::read(path)?;
    let (w, h, maxval, pos) = parse_header(&bytes, path, "P5")?;
    let n = w * h;
    let raster = &bytes[pos..];
    let samples: Vec<u32> = if maxval > 255 {
        if raster.len() < 2 * n {
            return Err(parse_err(path, "truncated raster"));
        }
        raster[..2 * n]
            .chunks_exact(2)
            .map(|b| u32::from(b[0]) << 8 | u32::from(b[1]))
            .collect()
    } else {
        if raster.len() < n {
            return Err(parse_err(path, "truncated raster"));
        }
        raster[..n].iter().map(|&b| u32::from(b)).collect()
    };
    for (i, &s) in samples.iter().enumerate() {
        if s > maxval {
            return Err(Error::OutOfRange(format!(
                "{}: sample {s} at index {i} exceeds maxval {maxval}",
                path.display()
            )));
        }
    }
    Ok((w, h, maxval, samples))
}

/// Write a binary PGM (P5); big-endian 16-bit samples when `maxval > 255`.
pub fn write_pgm(path: &Path, w: usize, h: usize, maxval: u32, samples: &[u32]) -> Result<()> {
    assert_eq!(samples.len(), w * h);
    let mut out = fs::File::create(path)?;
    write!(out, "P5\n{w} {h}\n{maxval}\n")?;
    if maxval > 255 {
        let mut buf = Vec::with_capacity(2 * samples.len());
        for &s in samples {
            buf.extend_from_slice(&(s as u16).to_be_bytes());
        }
        out.write_all(&buf)?;
    } else {
        let buf: Vec<u8> = samples.iter().map(|&s| s as u8).collect();
        out.write_all(&buf)?;
    }
    Ok(())
}

/// Read a binary PPM (P6) with `maxval <= 255`.
pub fn read_ppm(path: &Path) -> Result<(usize, usize, u32, Vec<[u8; 3]>)> {
    let bytes = fs::read(path)?;
    let (w, h, maxval, pos) = parse_header(&bytes, path, "P6")?;
    if maxval > 255 {
        return Err(parse_err(path, "only 24-bit (maxval <= 255) PPM is supported"));
    }
    let n = w * h;
    let raster = &bytes[pos..];
    if raster.len() < 3 * n {
        return Err(parse_err(path, "truncated raster"));
    }
    let mut px = Vec::with_capacity(n);
    for c in raster[..3 * n].chunks_exact(3) {
        for &b in c {
            if u32::from(b) > maxval {
                return Err(Error::OutOfRange(format!(
                    "{}: sample {b} exceeds maxval {maxval}",
                    path.display()
                )));
            }
        }
        px.push([c[0], c[1], c[2]]);
    }
    Ok((w, h, maxval, px))
}

/// Write a binary PPM (P6), maxval 255.
pub fn write_ppm(path: &Path, w: usize, h: usize, px: &[[u8; 3]]) -> Result<()> {
    assert_eq!(px.len(), w * h);
    let mut out = fs::File::create(path)?;
    write!(out, "P6\n{w} {h}\n255\n")?;
    let mut buf = Vec::with_capacity(3 * px.len());
    for p in px {
        buf.extend_from_slice(p);
    }
    out.write_all(&buf)?;
    Ok(())
}
