//! Scalar weight and error-norm functions used by the solvers.
//!
//! The spatial window is a normalized Gaussian over the square patch; because
//! weights are kept per offset (duplicates near borders are not merged), the
//! normalizer is the same for every pixel. The color weight follows the
//! guidance image with the per-channel sum divided by `3 * 2 * sigma_c^2`.
//! The exponential error norm `2*lambda^2*(1 - exp(-x^2 / 2*lambda^2))` is a
//! bounded robust penalty; its derivative with respect to the squared error
//! is the `exp` factor itself, which is what downweights outliers in the
//! fixed-point updates.

use crate::error::{Error, Result};
use crate::image::ColorImage;

/// Lower floor applied to all multiplicative weights so update denominators
/// stay strictly positive even when the exponentials underflow.
pub const WEIGHT_FLOOR: f64 = 1e-300;

/// Precomputed Gaussian window over a `(2r+1)^2` offset patch.
#[derive(Debug, Clone)]
pub struct SpatialKernel {
    radius: usize,
    sigma_s: f64,
    /// Unnormalized weight per offset, row-major over `(dy, dx)`.
    table: Vec<f64>,
    /// Sum of the table; identical for every pixel under the per-offset
    /// border convention.
    normalizer: f64,
}

impl SpatialKernel {
    pub fn new(radius: usize, sigma_s: f64) -> Result<Self> {
        if sigma_s <= 0.0 || !sigma_s.is_finite() {
            return Err(Error::Config(format!(
                "sigma_s must be positive and finite, got {sigma_s}"
            )));
        }
        let side = 2 * radius + 1;
        let inv = 1.0 / (2.0 * sigma_s * sigma_s);
        let mut table = Vec::with_capacity(side * side);
        let r = radius as i64;
        for dy in -r..=r {
            for dx in -r..=r {
                let d2 = (dy * dy + dx * dx) as f64;
                table.push((-d2 * inv).exp());
            }
        }
        let normalizer = table.iter().sum();
        Ok(Self {
            radius,
            sigma_s,
            table,
            normalizer,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    /// Unnormalized Gaussian weight for an in-patch offset.
    #[inline]
    pub fn unnormalized(&self, dy: i64, dx: i64) -> f64 {
        let side = 2 * self.radius + 1;
        let r = self.radius as i64;
        self.table[((dy + r) as usize) * side + (dx + r) as usize]
    }

    /// Sum of unnormalized weights over the patch (the `Z` normalizer).
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }
}

/// Bandwidth of the exponential error norm, in normalized depth units.
#[derive(Debug, Clone, Copy)]
pub struct RobustNormParams {
    pub lambda: f64,
}

impl RobustNormParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "bandwidth lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self { lambda })
    }
}

/// Normalized Gaussian window weight between pixels `i` and `j`.
///
/// `j` must lie within the patch around `i`; the weight depends only on the
/// offset, so it is the same at borders (offsets there resolve to clamped
/// pixels but keep their own weight).
pub fn spatial_weight(i: (i64, i64), j: (i64, i64), kernel: &SpatialKernel) -> Result<f64> {
    let (dy, dx) = (j.0 - i.0, j.1 - i.1);
    let r = kernel.radius() as i64;
    if dy.abs() > r || dx.abs() > r {
        return Err(Error::Domain(format!(
            "pixel {j:?} is outside the radius-{r} neighborhood of {i:?}"
        )));
    }
    Ok(kernel.unnormalized(dy, dx) / kernel.normalizer())
}

/// Color guidance weight `exp(-sum_k |I_i^k - I_j^k|^2 / (3 * 2 * sigma_c^2))`,
/// floored at [`WEIGHT_FLOOR`].
pub fn color_weight(img: &ColorImage, i: (usize, usize), j: (usize, usize), sigma_c: f64) -> f64 {
    let a = img.get(i.0, i.1);
    let b = img.get(j.0, j.1);
    color_weight_rgb(a, b, sigma_c)
}

/// [`color_weight`] on raw channel triples.
#[inline]
pub fn color_weight_rgb(a: [f64; 3], b: [f64; 3], sigma_c: f64) -> f64 {
    let mut dist = 0.0;
    for k in 0..3 {
        let d = a[k] - b[k];
        dist += d * d;
    }
    (-dist / (3.0 * 2.0 * sigma_c * sigma_c)).exp().max(WEIGHT_FLOOR)
}

/// Combined color-spatial weight: the plain product of [`color_weight`] and
/// [`spatial_weight`], with no renormalization.
pub fn combined_weight(
    img: &ColorImage,
    i: (i64, i64),
    j: (i64, i64),
    kernel: &SpatialKernel,
    sigma_c: f64,
) -> Result<f64> {
    let sw = spatial_weight(i, j, kernel)?;
    let sh = img.shape();
    let ci = crate::image::clamp_coord(i, sh);
    let cj = crate::image::clamp_coord(j, sh);
    Ok(color_weight(img, ci, cj, sigma_c) * sw)
}

/// Exponential error norm `2*lambda^2 * (1 - exp(-x_sq / (2*lambda^2)))`.
///
/// Monotone nondecreasing in `x_sq` and bounded above by `2*lambda^2`.
#[inline]
pub fn exp_error_norm(x_sq: f64, params: &RobustNormParams) -> f64 {
    let two_l2 = 2.0 * params.lambda * params.lambda;
    two_l2 * (1.0 - (-x_sq / two_l2).exp())
}

/// Derivative of [`exp_error_norm`] with respect to `x_sq`:
/// `exp(-x_sq / (2*lambda^2))`, floored at [`WEIGHT_FLOOR`].
///
/// This is the robust weight factor (`d` and `s`) in the depth updates.
#[inline]
pub fn exp_error_norm_deriv(x_sq: f64, params: &RobustNormParams) -> f64 {
    let two_l2 = 2.0 * params.lambda * params.lambda;
    (-x_sq / two_l2).exp().max(WEIGHT_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{clamp_coord, GridShape, Neighborhood};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn radius_zero_weight_is_one() {
        let k = SpatialKernel::new(0, 9.0).unwrap();
        assert_eq!(spatial_weight((3, 3), (3, 3), &k).unwrap(), 1.0);
    }

    #[test]
    fn unnormalized_ratio_at_distance_nine() {
        let k = SpatialKernel::new(9, 9.0).unwrap();
        let ratio = k.unnormalized(9, 0) / k.unnormalized(0, 0);
        assert!((ratio - (-0.5f64).exp()).abs() < 1e-12);
        assert!((ratio - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn spatial_weight_is_symmetric_in_offset() {
        let k = SpatialKernel::new(4, 3.0).unwrap();
        for (dy, dx) in [(1, 2), (-3, 0), (4, -4)] {
            let a = spatial_weight((10, 10), (10 + dy, 10 + dx), &k).unwrap();
            let b = spatial_weight((10, 10), (10 - dy, 10 - dx), &k).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn spatial_weight_rejects_outside_patch() {
        let k = SpatialKernel::new(2, 3.0).unwrap();
        assert!(spatial_weight((0, 0), (3, 0), &k).is_err());
    }

    #[test]
    fn spatial_weights_sum_to_one_everywhere() {
        // Per-offset weights: the sum over the patch is Z/Z = 1 at every
        // pixel, border pixels included.
        let k = SpatialKernel::new(9, 9.0).unwrap();
        let sh = GridShape::new(5, 4).unwrap();
        for cy in 0..sh.height as i64 {
            for cx in 0..sh.width as i64 {
                let n = Neighborhood::new((cy, cx), 9);
                let sum: f64 = n
                    .offsets()
                    .map(|(dy, dx)| {
                        // Resolve the neighbor but keep the offset's weight.
                        let _ = clamp_coord((cy + dy, cx + dx), sh);
                        spatial_weight((cy, cx), (cy + dy, cx + dx), &k).unwrap()
                    })
                    .sum();
                assert!((sum - 1.0).abs() < 1e-12, "sum at ({cy},{cx}) = {sum}");
            }
        }
    }

    #[test]
    fn color_weight_identical_colors_is_one() {
        let img = ColorImage::constant(GridShape::new(2, 2).unwrap(), [0.3, 0.5, 0.7]).unwrap();
        assert_eq!(color_weight(&img, (0, 0), (1, 1), 10.0 / 255.0), 1.0);
    }

    #[test]
    fn color_weight_single_channel_difference() {
        let sc = 10.0 / 255.0;
        let a = [0.5, 0.5, 0.5];
        let b = [0.5 + 10.0 / 255.0, 0.5, 0.5];
        let w = color_weight_rgb(a, b, sc);
        assert!((w - (-1.0f64 / 6.0).exp()).abs() < 1e-12);
        assert!((w - 0.84648).abs() < 1e-5);
    }

    #[test]
    fn color_weight_black_vs_white_underflows_to_positive() {
        let sc = 10.0 / 255.0;
        let w = color_weight_rgb([0.0; 3], [1.0; 3], sc);
        let expect = (-(255.0f64 / 10.0).powi(2) / 2.0).exp();
        assert!(w > 0.0);
        assert!((w / expect - 1.0).abs() < 1e-9);
        assert!(w < 1e-140);
    }

    #[test]
    fn combined_weight_with_identical_colors_equals_spatial() {
        let img = ColorImage::constant(GridShape::new(8, 8).unwrap(), [0.2, 0.4, 0.6]).unwrap();
        let k = SpatialKernel::new(3, 2.0).unwrap();
        let c = combined_weight(&img, (4, 4), (5, 6), &k, 10.0 / 255.0).unwrap();
        let s = spatial_weight((4, 4), (5, 6), &k).unwrap();
        assert_eq!(c, s);
    }

    #[test]
    fn combined_weight_never_exceeds_spatial() {
        let sh = GridShape::new(6, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vals: Vec<[f64; 3]> = (0..sh.len())
            .map(|_| [rng.gen(), rng.gen(), rng.gen()])
            .collect();
        let img = ColorImage::from_vec(sh, vals).unwrap();
        let k = SpatialKernel::new(2, 3.0).unwrap();
        for dy in -2i64..=2 {
            for dx in -2i64..=2 {
                let c = combined_weight(&img, (3, 3), (3 + dy, 3 + dx), &k, 0.05).unwrap();
                let s = spatial_weight((3, 3), (3 + dy, 3 + dx), &k).unwrap();
                assert!(c <= s && c > 0.0);
            }
        }
    }

    #[test]
    fn combined_weight_at_center_is_peak_over_normalizer() {
        let img = ColorImage::constant(GridShape::new(4, 4).unwrap(), [0.5; 3]).unwrap();
        let k = SpatialKernel::new(2, 3.0).unwrap();
        let c = combined_weight(&img, (2, 2), (2, 2), &k, 0.05).unwrap();
        assert!((c - 1.0 / k.normalizer()).abs() < 1e-15);
    }

    #[test]
    fn exp_error_norm_zero_is_zero() {
        let p = RobustNormParams::new(0.1).unwrap();
        assert_eq!(exp_error_norm(0.0, &p), 0.0);
    }

    #[test]
    fn exp_error_norm_unit_lambda() {
        let p = RobustNormParams::new(1.0).unwrap();
        let v = exp_error_norm(2.0, &p);
        assert!((v - 2.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((v - 1.26424).abs() < 1e-5);
    }

    #[test]
    fn exp_error_norm_saturates_at_two_lambda_sq() {
        let p = RobustNormParams::new(0.5).unwrap();
        assert!((exp_error_norm(1e12, &p) - 0.5).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let lambda = rng.gen_range(1.0 / 255.0..50.0 / 255.0);
            let x_sq = rng.gen_range(0.0..2.0);
            let p = RobustNormParams::new(lambda).unwrap();
            assert!(exp_error_norm(x_sq, &p) <= 2.0 * lambda * lambda + 1e-15);
        }
    }

    #[test]
    fn exp_error_norm_monotone_in_x_sq() {
        let p = RobustNormParams::new(0.03).unwrap();
        let mut prev = -1.0;
        for i in 0..200 {
            let v = exp_error_norm(i as f64 * 0.005, &p);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn deriv_at_zero_is_one() {
        let p = RobustNormParams::new(0.2).unwrap();
        assert_eq!(exp_error_norm_deriv(0.0, &p), 1.0);
    }

    #[test]
    fn deriv_at_two_lambda_sq() {
        let p = RobustNormParams::new(0.07).unwrap();
        let v = exp_error_norm_deriv(2.0 * 0.07 * 0.07, &p);
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.36788).abs() < 1e-5);
    }

    #[test]
    fn deriv_example_lambda_seven_over_255() {
        let l = 7.0 / 255.0;
        let p = RobustNormParams::new(l).unwrap();
        let v = exp_error_norm_deriv(l * l, &p);
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert!((v - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn deriv_matches_finite_differences_of_norm() {
        // 1000 random (x_sq, lambda) samples. The step scales with the
        // curvature scale 2*lambda^2; the floored denominator keeps the
        // deep-saturation regime (derivative below 1e-6) meaningful.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let lambda = rng.gen_range(1.0 / 255.0..50.0 / 255.0);
            let x_sq: f64 = rng.gen_range(1e-4..0.25);
            let p = RobustNormParams::new(lambda).unwrap();
            let h = 1e-3 * 2.0 * lambda * lambda;
            let fd = (exp_error_norm(x_sq + h, &p) - exp_error_norm(x_sq - h, &p)) / (2.0 * h);
            let analytic = exp_error_norm_deriv(x_sq, &p);
            let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-6);
            assert!(
                rel < 1e-6,
                "lambda={lambda} x_sq={x_sq} analytic={analytic} fd={fd} rel={rel}"
            );
        }
    }
}
