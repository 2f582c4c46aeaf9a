//! Brute-force oracles and instance generators shared by the integration
//! tests.
//!
//! The oracles are deliberately naive: per-pixel double loops over the
//! patch, their own border clamping, their own weight formulas. They share
//! no code with the solver's sweep kernel, so agreement to 1e-12 checks the
//! implementation path, not itself.

// Each test binary compiles this module separately and uses a subset.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rgdu::image::{ColorImage, DepthMap, GridShape};
use rgdu::solver::BandwidthField;

pub const FLOOR: f64 = 1e-300;

pub fn rand_depth(sh: GridShape, rng: &mut ChaCha8Rng) -> DepthMap {
    DepthMap::from_vec(sh, (0..sh.len()).map(|_| rng.gen()).collect()).unwrap()
}

pub fn rand_color(sh: GridShape, rng: &mut ChaCha8Rng) -> ColorImage {
    ColorImage::from_vec(
        sh,
        (0..sh.len())
            .map(|_| [rng.gen(), rng.gen(), rng.gen()])
            .collect(),
    )
    .unwrap()
}

pub fn rand_bandwidth(sh: GridShape, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> BandwidthField {
    BandwidthField::from_vec(sh, (0..sh.len()).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

fn clamp_i(v: i64, dim: usize) -> usize {
    v.clamp(0, dim as i64 - 1) as usize
}

fn color_w(a: [f64; 3], b: [f64; 3], sigma_c: f64) -> f64 {
    let mut dist = 0.0;
    for k in 0..3 {
        let d = a[k] - b[k];
        dist += d * d;
    }
    (-dist / (3.0 * 2.0 * sigma_c * sigma_c)).exp().max(FLOOR)
}

/// Direct evaluation of the robust fixed-point update at `(d, d0, bw)`.
#[allow(clippy::too_many_arguments)]
pub fn naive_robust_update(
    d: &DepthMap,
    d0: &DepthMap,
    img: &ColorImage,
    bw: &BandwidthField,
    alpha: f64,
    sigma_s: f64,
    sigma_c: f64,
    radius: usize,
) -> Vec<f64> {
    let sh = d.shape();
    let r = radius as i64;
    let mut out = vec![0.0; sh.len()];
    for y in 0..sh.height {
        for x in 0..sh.width {
            let lambda = bw.get(y, x);
            let two_l2 = 2.0 * lambda * lambda;
            let di = d.get(y, x);
            let ci = img.get(y, x);

            let mut z = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    z += (-((dy * dy + dx * dx) as f64) / (2.0 * sigma_s * sigma_s)).exp();
                }
            }

            let mut num = 0.0;
            let mut den = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let w =
                        (-((dy * dy + dx * dx) as f64) / (2.0 * sigma_s * sigma_s)).exp() / z;
                    let jy = clamp_i(y as i64 + dy, sh.height);
                    let jx = clamp_i(x as i64 + dx, sh.width);
                    let d0j = d0.get(jy, jx);
                    let dnj = d.get(jy, jx);
                    let dfac = (-(di - d0j) * (di - d0j) / two_l2).exp().max(FLOOR);
                    let sfac = (-(di - dnj) * (di - dnj) / two_l2).exp().max(FLOOR);
                    let wc = color_w(ci, img.get(jy, jx), sigma_c);
                    num += (1.0 - alpha) * w * dfac * d0j + 2.0 * alpha * wc * w * sfac * dnj;
                    den += (1.0 - alpha) * w * dfac + 2.0 * alpha * wc * w * sfac;
                }
            }
            out[sh.index(y, x)] = num / den;
        }
    }
    out
}

/// Direct evaluation of the MRF baseline update at `(d, d0)`.
pub fn naive_mrf_update(
    d: &DepthMap,
    d0: &DepthMap,
    img: &ColorImage,
    alpha: f64,
    sigma_c: f64,
    radius: usize,
) -> Vec<f64> {
    let sh = d.shape();
    let r = radius as i64;
    let mut out = vec![0.0; sh.len()];
    for y in 0..sh.height {
        for x in 0..sh.width {
            let ci = img.get(y, x);
            let mut num = (1.0 - alpha) * d0.get(y, x);
            let mut den = 1.0 - alpha;
            for dy in -r..=r {
                for dx in -r..=r {
                    let jy = clamp_i(y as i64 + dy, sh.height);
                    let jx = clamp_i(x as i64 + dx, sh.width);
                    let wc = color_w(ci, img.get(jy, jx), sigma_c);
                    num += 2.0 * alpha * wc * d.get(jy, jx);
                    den += 2.0 * alpha * wc;
                }
            }
            out[sh.index(y, x)] = num / den;
        }
    }
    out
}

/// Direct evaluation of the full energy at `(d, lambda)`: robust data and
/// smoothness terms plus the forward-difference bandwidth regularizer.
#[allow(clippy::too_many_arguments)]
pub fn naive_objective(
    d: &DepthMap,
    d0: &DepthMap,
    img: &ColorImage,
    bw: &BandwidthField,
    alpha: f64,
    beta: f64,
    sigma_s: f64,
    sigma_c: f64,
    radius: usize,
) -> f64 {
    let sh = d.shape();
    let r = radius as i64;
    let phi = |x_sq: f64, lambda: f64| {
        let two_l2 = 2.0 * lambda * lambda;
        two_l2 * (1.0 - (-x_sq / two_l2).exp())
    };

    let mut acc = 0.0;
    for y in 0..sh.height {
        for x in 0..sh.width {
            let lambda = bw.get(y, x);
            let di = d.get(y, x);
            let ci = img.get(y, x);

            let mut z = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    z += (-((dy * dy + dx * dx) as f64) / (2.0 * sigma_s * sigma_s)).exp();
                }
            }
            for dy in -r..=r {
                for dx in -r..=r {
                    let w =
                        (-((dy * dy + dx * dx) as f64) / (2.0 * sigma_s * sigma_s)).exp() / z;
                    let jy = clamp_i(y as i64 + dy, sh.height);
                    let jx = clamp_i(x as i64 + dx, sh.width);
                    let dd = di - d0.get(jy, jx);
                    let ds = di - d.get(jy, jx);
                    let wc = color_w(ci, img.get(jy, jx), sigma_c);
                    acc += (1.0 - alpha) * w * phi(dd * dd, lambda)
                        + alpha * wc * w * phi(ds * ds, lambda);
                }
            }
        }
    }

    for y in 0..sh.height {
        for x in 0..sh.width {
            let c = bw.get(y, x);
            if x + 1 < sh.width {
                let g = bw.get(y, x + 1) - c;
                acc += beta * g * g;
            }
            if y + 1 < sh.height {
                let g = bw.get(y + 1, x) - c;
                acc += beta * g * g;
            }
        }
    }
    acc
}
