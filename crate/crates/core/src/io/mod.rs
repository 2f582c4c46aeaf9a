//! Image and configuration ingestion/emission.
//!
//! Depth maps travel as binary PGM (8- or 16-bit gray) or as the `DMF`
//! little-endian float format; guidance images as binary 24-bit PPM. Readers
//! reject NaN/infinite and out-of-range samples with a named error; nothing
//! is clamped on the way in. Integer writers quantize with round-half-up so
//! written files are stable across platforms.
//!
//! Depth codes are taken at face value: a 0 code means depth 0.0, not
//! "missing measurement". Inputs using a missing-data sentinel must be
//! filled before they come through here.

mod config;
mod floatmap;
mod netpbm;

pub use config::{load_config, save_config};

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{denormalize_depth, normalize_depth, ColorImage, DepthMap, GridShape};
use crate::solver::BandwidthField;

/// On-disk depth representation plus its scale metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepthEncoding {
    /// 8-bit PGM, codes 0..=255.
    Gray8,
    /// 16-bit PGM, codes 0..=65535, big-endian samples.
    Gray16,
    /// `DMF` float map; `max_mm` is the physical depth of value 1.0 in
    /// millimeters when known.
    FloatMap { max_mm: Option<f64> },
}

impl DepthEncoding {
    /// Quantization ceiling for the integer encodings.
    pub fn max_code(&self) -> Option<u32> {
        match self {
            DepthEncoding::Gray8 => Some(255),
            DepthEncoding::Gray16 => Some(65535),
            DepthEncoding::FloatMap { .. } => None,
        }
    }

    /// Millimeter scale carried by the encoding, if any.
    pub fn max_mm(&self) -> Option<f64> {
        match self {
            DepthEncoding::FloatMap { max_mm } => *max_mm,
            _ => None,
        }
    }
}

/// Read a depth map in the declared encoding.
///
/// The file must actually match: an 8-bit PGM declared as [`DepthEncoding::Gray16`]
/// is an error, not a silent rescale.
pub fn read_depth(path: &Path, encoding: &DepthEncoding) -> Result<DepthMap> {
    match encoding {
        DepthEncoding::Gray8 | DepthEncoding::Gray16 => {
            let (w, h, maxval, samples) = netpbm::read_pgm(path)?;
            let want = encoding.max_code().unwrap();
            if maxval != want {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    msg: format!("expected maxval {want}, file has {maxval}"),
                });
            }
            normalize_depth(&samples, GridShape::new(h, w)?, want)
        }
        DepthEncoding::FloatMap { .. } => Ok(floatmap::read_dmf(path)?.0),
    }
}

/// Read a depth map, sniffing the encoding from the file itself.
pub fn read_depth_auto(path: &Path) -> Result<(DepthMap, DepthEncoding)> {
    let mut magic = [0u8; 3];
    {
        use std::io::Read;
        let mut f = std::fs::File::open(path)?;
        let n = f.read(&mut magic)?;
        if n < 2 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                msg: "file too short to identify".into(),
            });
        }
    }
    match &magic[..2] {
        b"P5" => {
            let (w, h, maxval, samples) = netpbm::read_pgm(path)?;
            let encoding = if maxval > 255 {
                DepthEncoding::Gray16
            } else {
                DepthEncoding::Gray8
            };
            let map = normalize_depth(&samples, GridShape::new(h, w)?, maxval)?;
            Ok((map, encoding))
        }
        b"DM" => {
            let (map, scale) = floatmap::read_dmf(path)?;
            Ok((map, DepthEncoding::FloatMap { max_mm: scale }))
        }
        b"P6" => Err(Error::Parse {
            path: path.display().to_string(),
            msg: "P6 is a color image; expected a depth map (P5 or DMF)".into(),
        }),
        _ => Err(Error::Parse {
            path: path.display().to_string(),
            msg: "unrecognized depth format (expected P5 PGM or DMF)".into(),
        }),
    }
}

/// Write a depth map in the given encoding. Integer encodings quantize with
/// round-half-up; the float map stores f32 values losslessly.
pub fn write_depth(map: &DepthMap, path: &Path, encoding: &DepthEncoding) -> Result<()> {
    let sh = map.shape();
    match encoding {
        DepthEncoding::Gray8 | DepthEncoding::Gray16 => {
            let max_code = encoding.max_code().unwrap();
            let codes = denormalize_depth(map, max_code);
            netpbm::write_pgm(path, sh.width, sh.height, max_code, &codes)
        }
        DepthEncoding::FloatMap { max_mm } => floatmap::write_dmf(map, *max_mm, path),
    }
}

/// Read a guidance image (binary 24-bit PPM), channels normalized to [0, 1].
pub fn read_color(path: &Path) -> Result<ColorImage> {
    let (w, h, maxval, px) = netpbm::read_ppm(path)?;
    let scale = 1.0 / maxval as f64;
    let values = px
        .iter()
        .map(|p| [p[0] as f64 * scale, p[1] as f64 * scale, p[2] as f64 * scale])
        .collect();
    ColorImage::from_vec(GridShape::new(h, w)?, values)
}

/// Write a guidance image as binary 24-bit PPM (round-half-up).
pub fn write_color(img: &ColorImage, path: &Path) -> Result<()> {
    let sh = img.shape();
    let px: Vec<[u8; 3]> = img
        .values()
        .iter()
        .map(|c| {
            let q = |v: f64| ((v * 255.0 + 0.5).floor() as u32).min(255) as u8;
            [q(c[0]), q(c[1]), q(c[2])]
        })
        .collect();
    netpbm::write_ppm(path, sh.width, sh.height, &px)
}

/// Write the bandwidth field as an 8-bit grayscale image, mapping
/// `[lambda_min, lambda_max]` linearly to codes 0..=255 (dark = narrow
/// bandwidth, i.e. preserved discontinuities).
pub fn write_bandwidth_visual(
    bw: &BandwidthField,
    lambda_min: f64,
    lambda_max: f64,
    path: &Path,
) -> Result<()> {
    if lambda_max.is_nan() || lambda_min.is_nan() || lambda_max <= lambda_min {
        return Err(Error::Config(format!(
            "need lambda_max > lambda_min, got {lambda_min} / {lambda_max}"
        )));
    }
    let sh = bw.shape();
    let span = lambda_max - lambda_min;
    let codes: Vec<u32> = bw
        .values()
        .iter()
        .map(|&l| {
            let t = ((l - lambda_min) / span).clamp(0.0, 1.0);
            ((t * 255.0 + 0.5).floor() as u32).min(255)
        })
        .collect();
    netpbm::write_pgm(path, sh.width, sh.height, 255, &codes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SolverConfig;
    use std::fs;

    fn shape(h: usize, w: usize) -> GridShape {
        GridShape::new(h, w).unwrap()
    }

    #[test]
    fn gray8_codes_normalize_on_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.pgm");
        netpbm::write_pgm(&path, 2, 2, 255, &[0, 255, 128, 64]).unwrap();
        let m = read_depth(&path, &DepthEncoding::Gray8).unwrap();
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(0, 1), 1.0);
        assert!((m.get(1, 0) - 128.0 / 255.0).abs() < 1e-15);
        assert!((m.get(1, 1) - 64.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn zero_byte_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.pgm");
        fs::write(&path, b"").unwrap();
        assert!(read_depth(&path, &DepthEncoding::Gray8).is_err());
        assert!(read_depth_auto(&path).is_err());
    }

    #[test]
    fn gray16_round_trip_is_code_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d16.pgm");
        let codes: Vec<u32> = vec![0, 1, 777, 32768, 65535, 4242];
        let m = normalize_depth(&codes, shape(2, 3), 65535).unwrap();
        write_depth(&m, &path, &DepthEncoding::Gray16).unwrap();
        let back = read_depth(&path, &DepthEncoding::Gray16).unwrap();
        assert_eq!(crate::image::denormalize_depth(&back, 65535), codes);
    }

    #[test]
    fn encoding_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.pgm");
        netpbm::write_pgm(&path, 1, 1, 255, &[7]).unwrap();
        assert!(read_depth(&path, &DepthEncoding::Gray16).is_err());
    }

    #[test]
    fn quantization_rounds_half_up() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.pgm");
        let m = DepthMap::from_vec(shape(1, 3), vec![0.5, 1.0, 0.0]).unwrap();
        write_depth(&m, &path, &DepthEncoding::Gray8).unwrap();
        let (_, _, _, samples) = netpbm::read_pgm(&path).unwrap();
        // 0.5 * 255 = 127.5 rounds up to 128.
        assert_eq!(samples, vec![128, 255, 0]);
    }

    #[test]
    fn dmf_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.dmf");
        let vals = vec![0.0, 1.0, 0.25, 1.0 / 3.0, 0.9999999];
        let m = DepthMap::from_vec(shape(1, 5), vals).unwrap();
        write_depth(&m, &path, &DepthEncoding::FloatMap { max_mm: Some(1500.0) }).unwrap();
        let (back, enc) = read_depth_auto(&path).unwrap();
        assert_eq!(enc, DepthEncoding::FloatMap { max_mm: Some(1500.0) });
        for (a, b) in m.values().iter().zip(back.values()) {
            assert_eq!((*a as f32).to_bits(), (*b as f32).to_bits());
        }
    }

    #[test]
    fn dmf_rejects_out_of_range_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.dmf");
        let mut bytes = b"DMF\n2 1\n0\n".to_vec();
        bytes.extend_from_slice(&0.5f32.to_le_bytes());
        bytes.extend_from_slice(&f32::NAN.to_le_bytes());
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_depth_auto(&path),
            Err(Error::OutOfRange(_))
        ));

        let mut bytes = b"DMF\n2 1\n0\n".to_vec();
        bytes.extend_from_slice(&0.5f32.to_le_bytes());
        bytes.extend_from_slice(&1.5f32.to_le_bytes());
        fs::write(&path, &bytes).unwrap();
        assert!(read_depth_auto(&path).is_err());
    }

    #[test]
    fn ppm_color_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ppm");
        let img = ColorImage::from_vec(
            shape(1, 2),
            vec![[0.0, 0.5, 1.0], [1.0 / 255.0, 128.0 / 255.0, 0.2]],
        )
        .unwrap();
        write_color(&img, &path).unwrap();
        let back = read_color(&path).unwrap();
        assert_eq!(back.get(0, 0), [0.0, 128.0 / 255.0, 1.0]);
        assert_eq!(back.get(0, 1)[0], 1.0 / 255.0);
    }

    #[test]
    fn bandwidth_visual_maps_range_to_black_and_white() {
        let dir = tempfile::tempdir().unwrap();
        let (lo, hi) = (1.0 / 255.0, 50.0 / 255.0);

        let black = dir.path().join("black.pgm");
        let bw = BandwidthField::constant(shape(2, 2), lo).unwrap();
        write_bandwidth_visual(&bw, lo, hi, &black).unwrap();
        assert_eq!(netpbm::read_pgm(&black).unwrap().3, vec![0; 4]);

        let white = dir.path().join("white.pgm");
        let bw = BandwidthField::constant(shape(2, 2), hi).unwrap();
        write_bandwidth_visual(&bw, lo, hi, &white).unwrap();
        assert_eq!(netpbm::read_pgm(&white).unwrap().3, vec![255; 4]);

        let mid = dir.path().join("mid.pgm");
        let bw = BandwidthField::constant(shape(2, 2), (lo + hi) / 2.0).unwrap();
        write_bandwidth_visual(&bw, lo, hi, &mid).unwrap();
        assert_eq!(netpbm::read_pgm(&mid).unwrap().3, vec![128; 4]);
    }

    #[test]
    fn empty_config_file_keeps_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.cfg");
        fs::write(&path, "# nothing here\n").unwrap();
        let cfg = load_config(&path).unwrap();
        assert_eq!(cfg, SolverConfig::default());
        assert!(cfg.alpha.is_none());
    }

    #[test]
    fn config_rejects_alpha_out_of_range() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        fs::write(&path, "alpha = 1.5\n").unwrap();
        let err = load_config(&path).unwrap_err();
        assert!(err.to_string().contains("alpha must be in (0,1)"), "{err}");
    }

    #[test]
    fn config_rejects_unknown_keys_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("typo.cfg");
        fs::write(&path, "beta = 0.3\nalhpa = 0.9\n").unwrap();
        let err = load_config(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("alhpa"), "{msg}");
    }

    #[test]
    fn config_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.cfg");
        let mut cfg = SolverConfig::for_factor(4);
        cfg.tau = 0.3;
        cfg.adaptive_bandwidth = false;
        save_config(&cfg, &path).unwrap();
        let back = load_config(&path).unwrap();
        assert_eq!(back, cfg);

        // Unresolved alpha/max_iters survive the round trip as unset.
        let auto = SolverConfig::default();
        save_config(&auto, &path).unwrap();
        assert_eq!(load_config(&path).unwrap(), auto);
    }
}
