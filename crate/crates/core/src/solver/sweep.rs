//! Shared patch-sweep kernel for the robust solver and the MRF baseline.
//!
//! All per-pixel operations (depth update, bandwidth gradient, objective)
//! walk the same `(2r+1)^2` offset patch over border-padded buffers, so they
//! are implemented once here behind const-generic flags and monomorphized
//! into the combinations the public operations need. Rows are processed in
//! parallel; within a pixel the offset loop runs in a fixed row-major order,
//! which keeps results bit-identical regardless of thread count.
//!
//! Padding replicates the border pixel, which is exactly the per-offset
//! clamping convention: an offset that leaves the grid reads the nearest
//! valid pixel but keeps its own Gaussian weight.

use rayon::prelude::*;

use crate::kernels::WEIGHT_FLOOR;

/// Scalar grid with an `r`-pixel replicated border on all sides.
pub(crate) struct PaddedScalar {
    pub h: usize,
    pub w: usize,
    pub r: usize,
    pub pw: usize,
    pub data: Vec<f64>,
}

impl PaddedScalar {
    pub fn new(h: usize, w: usize, r: usize) -> Self {
        let pw = w + 2 * r;
        let ph = h + 2 * r;
        Self {
            h,
            w,
            r,
            pw,
            data: vec![0.0; ph * pw],
        }
    }

    pub fn from_grid(src: &[f64], h: usize, w: usize, r: usize) -> Self {
        let mut p = Self::new(h, w, r);
        p.fill_from(src);
        p
    }

    /// Copy an `h` x `w` grid into the interior and replicate the borders.
    pub fn fill_from(&mut self, src: &[f64]) {
        let (h, w, r, pw) = (self.h, self.w, self.r, self.pw);
        debug_assert_eq!(src.len(), h * w);
        for y in 0..h {
            let row = (y + r) * pw;
            self.data[row + r..row + r + w].copy_from_slice(&src[y * w..(y + 1) * w]);
            let left = self.data[row + r];
            let right = self.data[row + r + w - 1];
            for x in 0..r {
                self.data[row + x] = left;
                self.data[row + r + w + x] = right;
            }
        }
        for y in 0..r {
            let (top, rest) = self.data.split_at_mut((y + 1) * pw);
            let src_row = &rest[(r - y - 1) * pw..(r - y) * pw];
            top[y * pw..].copy_from_slice(src_row);
        }
        for y in 0..r {
            let dst = (h + r + y) * pw;
            let src_row = (h + r - 1) * pw;
            let (head, tail) = self.data.split_at_mut(dst);
            tail[..pw].copy_from_slice(&head[src_row..src_row + pw]);
        }
    }
}

/// RGB grid with an `r`-pixel replicated border; padding layout matches
/// [`PaddedScalar`] so the same linear index addresses both.
pub(crate) struct PaddedColor {
    pub data: Vec<[f64; 3]>,
}

impl PaddedColor {
    pub fn from_grid(src: &[[f64; 3]], h: usize, w: usize, r: usize) -> Self {
        let pw = w + 2 * r;
        let ph = h + 2 * r;
        let mut data = vec![[0.0; 3]; ph * pw];
        for y in 0..h {
            let row = (y + r) * pw;
            data[row + r..row + r + w].copy_from_slice(&src[y * w..(y + 1) * w]);
            let left = data[row + r];
            let right = data[row + r + w - 1];
            for x in 0..r {
                data[row + x] = left;
                data[row + r + w + x] = right;
            }
        }
        for y in 0..r {
            let src_row: Vec<[f64; 3]> = data[r * pw..(r + 1) * pw].to_vec();
            data[y * pw..(y + 1) * pw].copy_from_slice(&src_row);
        }
        for y in 0..r {
            let src_row: Vec<[f64; 3]> = data[(h + r - 1) * pw..(h + r) * pw].to_vec();
            let dst = (h + r + y) * pw;
            data[dst..dst + pw].copy_from_slice(&src_row);
        }
        Self { data }
    }
}

pub(crate) struct SweepParams<'a> {
    pub h: usize,
    pub w: usize,
    pub radius: usize,
    pub alpha: f64,
    pub sigma_c: f64,
    /// Unnormalized Gaussian table over the patch, row-major.
    pub table: &'a [f64],
    /// Sum of the table (the spatial normalizer `Z`).
    pub z: f64,
}

pub(crate) struct SweepOut {
    /// Next depth iterate (valid when `DEPTH`).
    pub depth: Vec<f64>,
    /// Pair-sum part of the bandwidth gradient, without the Laplacian
    /// regularizer term (valid when `GRAD`).
    pub grad_pairs: Vec<f64>,
    /// Data + smoothness objective, without the bandwidth regularizer
    /// (valid when `OBJ`).
    pub obj_pairs: f64,
}

/// One Jacobi sweep over all pixels at the frozen state `(cur, lambda)`.
///
/// Computes any combination of: the next depth iterate, the pair-sum part of
/// the bandwidth gradient, and the data+smoothness objective, reusing the
/// same robust weights `d` and `s` for all three.
pub(crate) fn fused_sweep<const DEPTH: bool, const GRAD: bool, const OBJ: bool>(
    cur: &PaddedScalar,
    d0: &PaddedScalar,
    col: &PaddedColor,
    lambda: &[f64],
    p: &SweepParams,
) -> SweepOut {
    let (h, w, r) = (p.h, p.w, p.radius);
    let pw = cur.pw;
    let side = 2 * r + 1;
    let inv_6sc2 = 1.0 / (3.0 * 2.0 * p.sigma_c * p.sigma_c);
    let one_minus_alpha = 1.0 - p.alpha;
    let two_alpha = 2.0 * p.alpha;
    let inv_z = 1.0 / p.z;

    let mut depth = vec![0.0f64; h * w];
    let mut grad = vec![0.0f64; h * w];
    let mut obj_rows = vec![0.0f64; h];

    depth
        .par_chunks_mut(w)
        .zip(grad.par_chunks_mut(w))
        .zip(obj_rows.par_iter_mut())
        .enumerate()
        .for_each(|(y, ((drow, grow), obj_slot))| {
            let mut obj_acc = 0.0f64;
            for x in 0..w {
                let li = lambda[y * w + x];
                let inv_2l2 = 1.0 / (2.0 * li * li);
                let two_l2 = 2.0 * li * li;
                let four_l = 4.0 * li;
                let two_over_l = 2.0 / li;
                let center = (y + r) * pw + (x + r);
                let di = cur.data[center];
                let ci = col.data[center];

                let mut num_d = 0.0f64;
                let mut den_d = 0.0f64;
                let mut num_s = 0.0f64;
                let mut den_s = 0.0f64;
                let mut g_data = 0.0f64;
                let mut g_smooth = 0.0f64;
                let mut o_data = 0.0f64;
                let mut o_smooth = 0.0f64;

                let mut t = 0usize;
                let mut base = center - r * pw - r;
                for _ in 0..side {
                    for k in 0..side {
                        let wsp = p.table[t];
                        t += 1;
                        let j = base + k;
                        let d0j = d0.data[j];
                        let dnj = cur.data[j];
                        let cj = col.data[j];

                        let dd = di - d0j;
                        let dd2 = dd * dd;
                        // Robust data weight d = phi'(|D_i - D0_j|^2).
                        let dfac = (-dd2 * inv_2l2).exp().max(WEIGHT_FLOOR);

                        let c0 = ci[0] - cj[0];
                        let c1 = ci[1] - cj[1];
                        let c2 = ci[2] - cj[2];
                        let cdist = c0 * c0 + c1 * c1 + c2 * c2;
                        let ds = di - dnj;
                        let ds2 = ds * ds;
                        let b = -cdist * inv_6sc2;
                        // Fused color-robust product wc * s in one exp.
                        let wcs = (b - ds2 * inv_2l2).exp().max(WEIGHT_FLOOR);

                        if DEPTH {
                            num_d += wsp * dfac * d0j;
                            den_d += wsp * dfac;
                            num_s += wsp * wcs * dnj;
                            den_s += wsp * wcs;
                        }
                        if GRAD || OBJ {
                            let wc = b.exp().max(WEIGHT_FLOOR);
                            if GRAD {
                                g_data += wsp * (four_l * (1.0 - dfac) - two_over_l * dd2 * dfac);
                                g_smooth += wsp * (four_l * (wc - wcs) - two_over_l * ds2 * wcs);
                            }
                            if OBJ {
                                o_data += wsp * (1.0 - dfac);
                                o_smooth += wsp * (wc - wcs);
                            }
                        }
                    }
                    base += pw;
                }

                if DEPTH {
                    let num = one_minus_alpha * num_d + two_alpha * num_s;
                    let den = one_minus_alpha * den_d + two_alpha * den_s;
                    assert!(den > 0.0, "depth update denominator must stay positive");
                    drow[x] = (num / den).clamp(0.0, 1.0);
                }
                if GRAD {
                    grow[x] = (one_minus_alpha * g_data + p.alpha * g_smooth) * inv_z;
                }
                if OBJ {
                    obj_acc +=
                        (one_minus_alpha * o_data + p.alpha * o_smooth) * two_l2 * inv_z;
                }
            }
            if OBJ {
                *obj_slot = obj_acc;
            }
        });

    SweepOut {
        depth,
        grad_pairs: grad,
        // Fixed-order reduction over rows.
        obj_pairs: obj_rows.iter().sum(),
    }
}

/// One Jacobi sweep of the MRF baseline update, optionally evaluating the
/// MRF energy at the frozen state.
///
/// The data term anchors each pixel to its own initial value; the smoothness
/// sum runs over the same square patch with raw (unnormalized) color weights.
pub(crate) fn mrf_sweep<const OBJ: bool>(
    cur: &PaddedScalar,
    d0: &[f64],
    col: &PaddedColor,
    radius: usize,
    alpha: f64,
    sigma_c: f64,
) -> (Vec<f64>, f64) {
    let (h, w, r) = (cur.h, cur.w, radius);
    let pw = cur.pw;
    let side = 2 * r + 1;
    let inv_6sc2 = 1.0 / (3.0 * 2.0 * sigma_c * sigma_c);
    let one_minus_alpha = 1.0 - alpha;
    let two_alpha = 2.0 * alpha;

    let mut depth = vec![0.0f64; h * w];
    let mut obj_rows = vec![0.0f64; h];

    depth
        .par_chunks_mut(w)
        .zip(obj_rows.par_iter_mut())
        .enumerate()
        .for_each(|(y, (drow, obj_slot))| {
            let mut obj_acc = 0.0f64;
            for x in 0..w {
                let center = (y + r) * pw + (x + r);
                let di = cur.data[center];
                let ci = col.data[center];
                let mut num_s = 0.0f64;
                let mut den_s = 0.0f64;
                let mut o_smooth = 0.0f64;

                let mut base = center - r * pw - r;
                for _ in 0..side {
                    for k in 0..side {
                        let j = base + k;
                        let dnj = cur.data[j];
                        let cj = col.data[j];
                        let c0 = ci[0] - cj[0];
                        let c1 = ci[1] - cj[1];
                        let c2 = ci[2] - cj[2];
                        let cdist = c0 * c0 + c1 * c1 + c2 * c2;
                        let wc = (-cdist * inv_6sc2).exp().max(WEIGHT_FLOOR);
                        num_s += wc * dnj;
                        den_s += wc;
                        if OBJ {
                            let ds = di - dnj;
                            o_smooth += wc * ds * ds;
                        }
                    }
                    base += pw;
                }

                let d0i = d0[y * w + x];
                let num = one_minus_alpha * d0i + two_alpha * num_s;
                let den = one_minus_alpha + two_alpha * den_s;
                drow[x] = (num / den).clamp(0.0, 1.0);
                if OBJ {
                    let dd = di - d0i;
                    obj_acc += one_minus_alpha * dd * dd + alpha * o_smooth;
                }
            }
            if OBJ {
                *obj_slot = obj_acc;
            }
        });

    (depth, obj_rows.iter().sum())
}
