//! Grid containers and coordinate arithmetic shared by all other modules.
//!
//! Depth maps hold normalized values in `[0, 1]` in double precision; color
//! images hold three normalized channels per pixel. Neighborhood lookups that
//! fall off the grid are resolved by replicate clamping, i.e. the nearest
//! valid pixel is read instead, which keeps every patch the same size at the
//! borders.

use crate::error::{Error, Result};

/// Grid dimensions in pixels. Always at least 1x1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    pub height: usize,
    pub width: usize,
}

impl GridShape {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Config(format!(
                "grid dimensions must be at least 1x1, got {height}x{width}"
            )));
        }
        Ok(Self { height, width })
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major index of `(y, x)`; no bounds check.
    #[inline]
    pub fn index(&self, y: usize, x: usize) -> usize {
        y * self.width + x
    }
}

/// Clamp a signed coordinate `(y, x)` onto the grid (replicate border policy).
#[inline]
pub fn clamp_coord(coord: (i64, i64), shape: GridShape) -> (usize, usize) {
    let y = coord.0.clamp(0, shape.height as i64 - 1) as usize;
    let x = coord.1.clamp(0, shape.width as i64 - 1) as usize;
    (y, x)
}

/// 2D grid of normalized depth values.
///
/// Every value is finite and lies in `[0, 1]`; construction rejects anything
/// else rather than clamping.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    shape: GridShape,
    values: Vec<f64>,
}

impl DepthMap {
    pub fn from_vec(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::Config(format!(
                "depth buffer length {} does not match shape {:?}",
                values.len(),
                shape
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange(format!(
                    "depth value {v} at index {i} is not in [0, 1]"
                )));
            }
        }
        Ok(Self { shape, values })
    }

    pub fn constant(shape: GridShape, value: f64) -> Result<Self> {
        Self::from_vec(shape, vec![value; shape.len()])
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[self.shape.index(y, x)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// 2D RGB grid with channels normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    shape: GridShape,
    values: Vec<[f64; 3]>,
}

impl ColorImage {
    pub fn from_vec(shape: GridShape, values: Vec<[f64; 3]>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::Config(format!(
                "color buffer length {} does not match shape {:?}",
                values.len(),
                shape
            )));
        }
        for (i, px) in values.iter().enumerate() {
            for &c in px {
                if !c.is_finite() || !(0.0..=1.0).contains(&c) {
                    return Err(Error::OutOfRange(format!(
                        "color channel value {c} at pixel {i} is not in [0, 1]"
                    )));
                }
            }
        }
        Ok(Self { shape, values })
    }

    pub fn constant(shape: GridShape, rgb: [f64; 3]) -> Result<Self> {
        Self::from_vec(shape, vec![rgb; shape.len()])
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> [f64; 3] {
        self.values[self.shape.index(y, x)]
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }
}

/// Square patch of offsets around a center pixel.
///
/// A radius-`r` neighborhood covers the full `(2r+1)^2` offset square
/// including the center offset `(0, 0)`. Offsets that leave the grid resolve
/// to the clamped nearest pixel, so duplicate resolved coordinates can occur
/// near borders; weights are kept per offset, never merged.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    pub center: (i64, i64),
    pub radius: usize,
}

impl Neighborhood {
    pub fn new(center: (i64, i64), radius: usize) -> Self {
        Self { center, radius }
    }

    /// All offsets in row-major order, `(dy, dx)` with `|dy|, |dx| <= radius`.
    pub fn offsets(&self) -> impl Iterator<Item = (i64, i64)> {
        let r = self.radius as i64;
        (-r..=r).flat_map(move |dy| (-r..=r).map(move |dx| (dy, dx)))
    }

    /// Resolved in-grid coordinates for every offset, with border clamping.
    pub fn resolved(&self, shape: GridShape) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (cy, cx) = self.center;
        self.offsets()
            .map(move |(dy, dx)| clamp_coord((cy + dy, cx + dx), shape))
    }

    pub fn len(&self) -> usize {
        let side = 2 * self.radius + 1;
        side * side
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Normalize an integer code grid to a [`DepthMap`] by dividing by `max_code`.
///
/// Codes above `max_code` are rejected. The inverse is
/// [`denormalize_depth`], which round-trips integer codes exactly.
pub fn normalize_depth(raw: &[u32], shape: GridShape, max_code: u32) -> Result<DepthMap> {
    if max_code == 0 {
        return Err(Error::Config("max_code must be positive".into()));
    }
    if raw.len() != shape.len() {
        return Err(Error::Config(format!(
            "raw buffer length {} does not match shape {:?}",
            raw.len(),
            shape
        )));
    }
    let scale = 1.0 / max_code as f64;
    let mut values = Vec::with_capacity(raw.len());
    for (i, &code) in raw.iter().enumerate() {
        if code > max_code {
            return Err(Error::OutOfRange(format!(
                "raw code {code} at index {i} exceeds max_code {max_code}"
            )));
        }
        values.push(code as f64 * scale);
    }
    DepthMap::from_vec(shape, values)
}

/// Quantize a depth map back to integer codes with round-half-up.
pub fn denormalize_depth(map: &DepthMap, max_code: u32) -> Vec<u32> {
    map.values()
        .iter()
        .map(|&v| {
            let code = (v * max_code as f64 + 0.5).floor();
            (code as u32).min(max_code)
        })
        .collect()
}

/// Cubic convolution kernel weights (a = -0.5) for the four taps around a
/// sample at fractional position `t` in `[0, 1)` between taps 1 and 2.
#[inline]
fn cubic_weights(t: f64) -> [f64; 4] {
    // Keys kernel, a = -0.5: w(s) = 1.5|s|^3 - 2.5|s|^2 + 1 for |s| <= 1,
    // w(s) = -0.5|s|^3 + 2.5|s|^2 - 4|s| + 2 for 1 < |s| < 2.
    let w0 = ((-0.5 * (t + 1.0) + 2.5) * (t + 1.0) - 4.0) * (t + 1.0) + 2.0;
    let w1 = (1.5 * t - 2.5) * t * t + 1.0;
    let s2 = 1.0 - t;
    let w2 = (1.5 * s2 - 2.5) * s2 * s2 + 1.0;
    let s3 = 2.0 - t;
    let w3 = ((-0.5 * s3 + 2.5) * s3 - 4.0) * s3 + 2.0;
    [w0, w1, w2, w3]
}

/// Upsample by an integer factor with cubic convolution (a = -0.5).
///
/// Output pixel `(y, x)` samples the source at
/// `((y + 0.5) / factor - 0.5, (x + 0.5) / factor - 0.5)`; source reads
/// outside the grid replicate the border pixel, and the result is clamped to
/// `[0, 1]` since cubic interpolation can overshoot near discontinuities.
/// `factor == 1` returns the input unchanged.
pub fn bicubic_upsample(src: &DepthMap, factor: usize) -> Result<DepthMap> {
    if factor == 0 {
        return Err(Error::Config("upsampling factor must be >= 1".into()));
    }
    if factor == 1 {
        return Ok(src.clone());
    }
    let sh = src.shape();
    let out_shape = GridShape::new(sh.height * factor, sh.width * factor)?;
    let inv = 1.0 / factor as f64;

    // Separable: horizontal pass into a src.height x out.width buffer,
    // then vertical pass.
    let mut taps_x = Vec::with_capacity(out_shape.width);
    for x in 0..out_shape.width {
        let sx = (x as f64 + 0.5) * inv - 0.5;
        let base = sx.floor();
        taps_x.push((base as i64, cubic_weights(sx - base)));
    }

    let mut mid = vec![0.0f64; sh.height * out_shape.width];
    for y in 0..sh.height {
        let row = &src.values()[y * sh.width..(y + 1) * sh.width];
        for (x, &(base, w)) in taps_x.iter().enumerate() {
            let mut acc = 0.0;
            for (k, &wk) in w.iter().enumerate() {
                let sx = (base - 1 + k as i64).clamp(0, sh.width as i64 - 1) as usize;
                acc += wk * row[sx];
            }
            mid[y * out_shape.width + x] = acc;
        }
    }

    let mut out = vec![0.0f64; out_shape.len()];
    for y in 0..out_shape.height {
        let sy = (y as f64 + 0.5) * inv - 0.5;
        let base = sy.floor();
        let w = cubic_weights(sy - base);
        let by = base as i64;
        for x in 0..out_shape.width {
            let mut acc = 0.0;
            for (k, &wk) in w.iter().enumerate() {
                let sy = (by - 1 + k as i64).clamp(0, sh.height as i64 - 1) as usize;
                acc += wk * mid[sy * out_shape.width + x];
            }
            out[y * out_shape.width + x] = acc.clamp(0.0, 1.0);
        }
    }

    DepthMap::from_vec(out_shape, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(h: usize, w: usize) -> GridShape {
        GridShape::new(h, w).unwrap()
    }

    #[test]
    fn clamp_coord_lower_bound() {
        assert_eq!(clamp_coord((-3, 5), shape(10, 10)), (0, 5));
    }

    #[test]
    fn clamp_coord_identity_inside() {
        assert_eq!(clamp_coord((4, 4), shape(10, 10)), (4, 4));
    }

    #[test]
    fn clamp_coord_both_bounds() {
        assert_eq!(clamp_coord((12, -1), shape(10, 10)), (9, 0));
    }

    #[test]
    fn neighborhood_19x19_has_361_offsets() {
        let n = Neighborhood::new((5, 5), 9);
        assert_eq!(n.len(), 361);
        assert_eq!(n.offsets().count(), 361);
    }

    #[test]
    fn resolved_neighbors_always_inside() {
        let sh = shape(7, 5);
        for cy in -2..9i64 {
            for cx in -2..7i64 {
                for (y, x) in Neighborhood::new((cy, cx), 9).resolved(sh) {
                    assert!(y < sh.height && x < sh.width);
                }
            }
        }
    }

    #[test]
    fn normalize_full_scale() {
        let m = normalize_depth(&[255], shape(1, 1), 255).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
    }

    #[test]
    fn normalize_zero() {
        let m = normalize_depth(&[0], shape(1, 1), 65535).unwrap();
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn normalize_mid_code() {
        let m = normalize_depth(&[128], shape(1, 1), 255).unwrap();
        assert!((m.get(0, 0) - 128.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_rejects_code_above_max() {
        let err = normalize_depth(&[300], shape(1, 1), 255).unwrap_err();
        assert!(matches!(err, Error::OutOfRange(_)));
    }

    #[test]
    fn normalize_denormalize_round_trips_integer_codes() {
        let raw: Vec<u32> = (0..=255).collect();
        let m = normalize_depth(&raw, shape(16, 16), 255).unwrap();
        assert_eq!(denormalize_depth(&m, 255), raw);

        let raw16: Vec<u32> = (0..4096).map(|i| i * 16).collect();
        let m16 = normalize_depth(&raw16, shape(64, 64), 65535).unwrap();
        assert_eq!(denormalize_depth(&m16, 65535), raw16);
    }

    #[test]
    fn cubic_weights_at_half() {
        let w = cubic_weights(0.5);
        assert!((w[0] - -0.0625).abs() < 1e-15);
        assert!((w[1] - 0.5625).abs() < 1e-15);
        assert!((w[2] - 0.5625).abs() < 1e-15);
        assert!((w[3] - -0.0625).abs() < 1e-15);
    }

    #[test]
    fn cubic_weights_partition_of_unity() {
        for i in 0..100 {
            let t = i as f64 / 100.0;
            let sum: f64 = cubic_weights(t).iter().sum();
            assert!((sum - 1.0).abs() < 1e-14, "t={t} sum={sum}");
        }
    }

    #[test]
    fn bicubic_constant_stays_constant() {
        let src = DepthMap::constant(shape(6, 5), 0.4).unwrap();
        for factor in [2, 3, 4] {
            let up = bicubic_upsample(&src, factor).unwrap();
            assert_eq!(up.shape(), shape(6 * factor, 5 * factor));
            for &v in up.values() {
                assert!((v - 0.4).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn bicubic_factor_one_is_identity() {
        let vals: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let src = DepthMap::from_vec(shape(4, 5), vals).unwrap();
        let up = bicubic_upsample(&src, 1).unwrap();
        assert_eq!(up, src);
    }

    #[test]
    fn bicubic_reproduces_affine_ramp_away_from_border() {
        let (h, w) = (12, 14);
        let (c0, c1, c2) = (0.2, 0.01, 0.02);
        let mut vals = Vec::new();
        for y in 0..h {
            for x in 0..w {
                vals.push(c0 + c1 * x as f64 + c2 * y as f64);
            }
        }
        let src = DepthMap::from_vec(shape(h, w), vals).unwrap();
        for factor in [2usize, 4] {
            let up = bicubic_upsample(&src, factor).unwrap();
            let inv = 1.0 / factor as f64;
            let band = 2 * factor;
            for y in band..(h * factor - band) {
                for x in band..(w * factor - band) {
                    let sx = (x as f64 + 0.5) * inv - 0.5;
                    let sy = (y as f64 + 0.5) * inv - 0.5;
                    let expect = c0 + c1 * sx + c2 * sy;
                    assert!(
                        (up.get(y, x) - expect).abs() < 1e-12,
                        "factor {factor} at ({y},{x}): {} vs {expect}",
                        up.get(y, x)
                    );
                }
            }
        }
    }

    #[test]
    fn depth_map_rejects_out_of_range() {
        assert!(DepthMap::from_vec(shape(1, 2), vec![0.5, 1.1]).is_err());
        assert!(DepthMap::from_vec(shape(1, 2), vec![0.5, f64::NAN]).is_err());
        assert!(DepthMap::from_vec(shape(1, 2), vec![-0.1, 0.5]).is_err());
    }
}
