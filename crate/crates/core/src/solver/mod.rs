//! The optimization core: robust objective, fixed-point depth update,
//! data-driven bandwidth adaptation, and the MRF baseline.
//!
//! The upsampler minimizes
//!
//! ```text
//! E(D, lambda) = (1-a) * sum_i sum_{j in N(i)} w_ij  * phi(|D_i - D0_j|^2; lambda_i)
//!              +    a  * sum_i sum_{j in N(i)} w~_ij * phi(|D_i - D_j|^2;  lambda_i)
//!              + beta * sum_i |grad lambda_i|^2
//! ```
//!
//! where `phi` is the bounded exponential error norm, `w` is the normalized
//! spatial Gaussian, and `w~` multiplies in the color guidance weight. Depth
//! is updated by the fixed-point rule obtained from `dE/dD = 0` with the
//! robust weights frozen (a Jacobi sweep: every pixel reads the previous
//! iterate). The per-pixel bandwidth field descends the same energy with
//! step `tau`, reusing the robust weights already computed for the depth
//! update, then clamps to `[lambda_min, lambda_max]`.
//!
//! The regularizer contributes `-2 * beta * laplacian(lambda)` to the
//! bandwidth gradient, the true gradient of the forward-difference squared
//! gradient sum under replicate borders; this is pinned by the
//! finite-difference tests.

mod sweep;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::image::{bicubic_upsample, ColorImage, DepthMap, GridShape};
use crate::kernels::SpatialKernel;
use sweep::{fused_sweep, mrf_sweep, PaddedColor, PaddedScalar, SweepParams};

/// Per-factor balance between the data and smoothness terms.
const ALPHA_SCHEDULE: [(usize, f64); 4] = [(2, 0.8), (4, 0.9), (8, 0.96), (16, 0.99)];
/// Per-factor iteration caps.
const MAX_ITERS_SCHEDULE: [(usize, usize); 4] = [(2, 5), (4, 15), (8, 50), (16, 100)];

fn schedule_index(factor: usize) -> usize {
    let lf = (factor.max(1) as f64).log2();
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (i, (f, _)) in ALPHA_SCHEDULE.iter().enumerate() {
        let dist = (lf - (*f as f64).log2()).abs();
        if dist < best_dist {
            best = i;
            best_dist = dist;
        }
    }
    best
}

/// Default `alpha` for an upsampling factor (nearest schedule entry).
pub fn alpha_for_factor(factor: usize) -> f64 {
    ALPHA_SCHEDULE[schedule_index(factor)].1
}

/// Default iteration cap for an upsampling factor (nearest schedule entry).
pub fn max_iters_for_factor(factor: usize) -> usize {
    MAX_ITERS_SCHEDULE[schedule_index(factor)].1
}

/// All scalar hyperparameters of the solver.
///
/// `alpha` and `max_iters` are `None` by default, meaning "select from the
/// per-factor schedule when the factor is known"; [`upsample`] and
/// [`mrf_upsample`] resolve them from the derived factor. The factor-free
/// operations ([`objective`], [`update_depth`], [`bandwidth_gradient`])
/// require `alpha` to be set.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Data/smoothness balance in (0, 1); `None` selects per factor.
    pub alpha: Option<f64>,
    /// Weight of the bandwidth smoothness regularizer.
    pub beta: f64,
    /// Spatial Gaussian sigma in pixels.
    pub sigma_s: f64,
    /// Color weight sigma in normalized color units.
    pub sigma_c: f64,
    /// Patch radius in pixels; the patch is `(2r+1)^2`.
    pub patch_radius: usize,
    /// Initial bandwidth in normalized depth units.
    pub lambda_init: f64,
    /// Bandwidth gradient-descent step size.
    pub tau: f64,
    /// Lower bandwidth clamp.
    pub lambda_min: f64,
    /// Upper bandwidth clamp.
    pub lambda_max: f64,
    /// Iteration cap; `None` selects per factor.
    pub max_iters: Option<usize>,
    /// Convergence threshold on `max |D_next - D_cur|`.
    pub tol: f64,
    /// Enable per-pixel bandwidth adaptation.
    pub adaptive_bandwidth: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: None,
            beta: 0.3,
            sigma_s: 9.0,
            sigma_c: 10.0 / 255.0,
            patch_radius: 9,
            lambda_init: 7.0 / 255.0,
            tau: 0.3,
            lambda_min: 1.0 / 255.0,
            lambda_max: 50.0 / 255.0,
            max_iters: None,
            tol: 1e-5,
            adaptive_bandwidth: true,
        }
    }
}

impl SolverConfig {
    /// Defaults with `alpha` and `max_iters` pinned to the schedule entry
    /// for `factor`.
    pub fn for_factor(factor: usize) -> Self {
        Self {
            alpha: Some(alpha_for_factor(factor)),
            max_iters: Some(max_iters_for_factor(factor)),
            ..Self::default()
        }
    }

    /// Resolved `alpha`: the override if set, else the schedule entry.
    pub fn alpha_for(&self, factor: usize) -> f64 {
        self.alpha.unwrap_or_else(|| alpha_for_factor(factor))
    }

    /// Resolved iteration cap: the override if set, else the schedule entry.
    pub fn max_iters_for(&self, factor: usize) -> usize {
        self.max_iters.unwrap_or_else(|| max_iters_for_factor(factor))
    }

    fn require_alpha(&self) -> f64 {
        self.alpha
            .expect("SolverConfig.alpha must be set for factor-free operations")
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alpha {
            if a.is_nan() || a <= 0.0 || a >= 1.0 {
                return Err(Error::Config(format!("alpha must be in (0,1), got {a}")));
            }
        }
        if self.beta < 0.0 || !self.beta.is_finite() {
            return Err(Error::Config(format!("beta must be >= 0, got {}", self.beta)));
        }
        if self.sigma_s.is_nan() || self.sigma_s <= 0.0 {
            return Err(Error::Config(format!(
                "sigma_s must be positive, got {}",
                self.sigma_s
            )));
        }
        if self.sigma_c.is_nan() || self.sigma_c <= 0.0 {
            return Err(Error::Config(format!(
                "sigma_c must be positive, got {}",
                self.sigma_c
            )));
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        let bands_ordered = self.lambda_min > 0.0
            && self.lambda_min < self.lambda_init
            && self.lambda_init < self.lambda_max;
        if !bands_ordered {
            return Err(Error::Config(format!(
                "require 0 < lambda_min < lambda_init < lambda_max, got {} / {} / {}",
                self.lambda_min, self.lambda_init, self.lambda_max
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if let Some(m) = self.max_iters {
            if m == 0 {
                return Err(Error::Config("max_iters must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Per-pixel bandwidth field of the exponential error norm.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthField {
    shape: GridShape,
    values: Vec<f64>,
}

impl BandwidthField {
    pub fn from_vec(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::Config(format!(
                "bandwidth buffer length {} does not match shape {:?}",
                values.len(),
                shape
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::OutOfRange(format!(
                    "bandwidth {v} at index {i} must be positive and finite"
                )));
            }
        }
        Ok(Self { shape, values })
    }

    pub fn constant(shape: GridShape, lambda: f64) -> Result<Self> {
        Self::from_vec(shape, vec![lambda; shape.len()])
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

/// Solver iterate: current depth, initial depth, bandwidth field.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub depth_current: DepthMap,
    pub depth_init: DepthMap,
    pub bandwidth: BandwidthField,
    pub iteration: usize,
    pub objective_trace: Vec<f64>,
}

impl SolverState {
    pub fn new(depth_init: DepthMap, bandwidth: BandwidthField) -> Result<Self> {
        if depth_init.shape() != bandwidth.shape() {
            return Err(Error::ShapeMismatch {
                expected: depth_init.shape(),
                got: bandwidth.shape(),
            });
        }
        Ok(Self {
            depth_current: depth_init.clone(),
            depth_init,
            bandwidth,
            iteration: 0,
            objective_trace: Vec::new(),
        })
    }
}

/// Per-run diagnostics returned by the upsamplers.
///
/// `objective_trace[n]` is the energy at the start of iteration `n`; the
/// last entry is the energy of the returned depth map, so the trace always
/// has `iterations_run + 1` entries.
#[derive(Debug, Clone)]
pub struct UpsampleReport {
    pub iterations_run: usize,
    pub final_objective: f64,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub wall_time: f64,
}

fn check_same_shape(expected: GridShape, got: GridShape) -> Result<()> {
    if expected != got {
        return Err(Error::ShapeMismatch { expected, got });
    }
    Ok(())
}

/// Squared-gradient sum of a bandwidth grid: forward differences,
/// replicate borders (the difference is zero past the last row/column).
fn grad_l2(v: &[f64], h: usize, w: usize) -> f64 {
    let mut acc = 0.0;
    for y in 0..h {
        for x in 0..w {
            let c = v[y * w + x];
            if x + 1 < w {
                let gx = v[y * w + x + 1] - c;
                acc += gx * gx;
            }
            if y + 1 < h {
                let gy = v[(y + 1) * w + x] - c;
                acc += gy * gy;
            }
        }
    }
    acc
}

/// 5-point Laplacian of the bandwidth field with replicate borders:
/// `up + down + left + right - 4 * center`, neighbors clamped to the grid.
pub fn discrete_laplacian(field: &BandwidthField) -> Vec<f64> {
    let sh = field.shape();
    let v = field.values();
    let (h, w) = (sh.height, sh.width);
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            let c = v[y * w + x];
            let up = v[y.saturating_sub(1) * w + x];
            let down = v[(y + 1).min(h - 1) * w + x];
            let left = v[y * w + x.saturating_sub(1)];
            let right = v[y * w + (x + 1).min(w - 1)];
            out[y * w + x] = up + down + left + right - 4.0 * c;
        }
    }
    out
}

struct SweepInputs {
    cur: PaddedScalar,
    d0: PaddedScalar,
    col: PaddedColor,
    kernel: SpatialKernel,
}

fn prepare_inputs(
    d: &DepthMap,
    d0: &DepthMap,
    img: &ColorImage,
    cfg: &SolverConfig,
) -> Result<SweepInputs> {
    let sh = d.shape();
    check_same_shape(sh, d0.shape())?;
    check_same_shape(sh, img.shape())?;
    let r = cfg.patch_radius;
    Ok(SweepInputs {
        cur: PaddedScalar::from_grid(d.values(), sh.height, sh.width, r),
        d0: PaddedScalar::from_grid(d0.values(), sh.height, sh.width, r),
        col: PaddedColor::from_grid(img.values(), sh.height, sh.width, r),
        kernel: SpatialKernel::new(r, cfg.sigma_s)?,
    })
}

fn sweep_params<'a>(
    sh: GridShape,
    kernel: &'a SpatialKernel,
    alpha: f64,
    cfg: &SolverConfig,
) -> SweepParams<'a> {
    SweepParams {
        h: sh.height,
        w: sh.width,
        radius: cfg.patch_radius,
        alpha,
        sigma_c: cfg.sigma_c,
        table: kernel.table(),
        z: kernel.normalizer(),
    }
}

/// Full energy at `(D, lambda)`: robust data term + robust color-guided
/// smoothness term + `beta` times the bandwidth squared-gradient sum.
///
/// Requires `cfg.alpha` to be set.
pub fn objective(
    d: &DepthMap,
    d0: &DepthMap,
    img: &ColorImage,
    bw: &BandwidthField,
    cfg: &SolverConfig,
) -> Result<f64> {
    check_same_shape(d.shape(), bw.shape())?;
    let alpha = cfg.require_alpha();
    let inp = prepare_inputs(d, d0, img, cfg)?;
    let p = sweep_params(d.shape(), &inp.kernel, alpha, cfg);
    let out = fused_sweep::<false, false, true>(&inp.cur, &inp.d0, &inp.col, bw.values(), &p);
    let sh = bw.shape();
    Ok(out.obj_pairs + cfg.beta * grad_l2(bw.values(), sh.height, sh.width))
}

/// One fixed-point depth update (Jacobi sweep) at the state's frozen
/// `(depth_current, bandwidth)`.
///
/// Every output pixel is a convex combination of initial and current depth
/// values in its patch, so the result stays inside `[0, 1]`. Panics if
/// `cfg.alpha` is unset or the update denominator degenerates (prevented by
/// weight flooring).
pub fn update_depth(state: &SolverState, img: &ColorImage, cfg: &SolverConfig) -> DepthMap {
    let alpha = cfg.require_alpha();
    let inp = prepare_inputs(&state.depth_current, &state.depth_init, img, cfg)
        .expect("state and guidance shapes must agree");
    let p = sweep_params(state.depth_current.shape(), &inp.kernel, alpha, cfg);
    let out = fused_sweep::<true, false, false>(
        &inp.cur,
        &inp.d0,
        &inp.col,
        state.bandwidth.values(),
        &p,
    );
    DepthMap::from_vec(state.depth_current.shape(), out.depth)
        .expect("update output is a convex combination")
}

/// Gradient of [`objective`] with respect to each pixel's bandwidth,
/// evaluated at the state's frozen `(depth_current, bandwidth)`.
///
/// Per pixel this is the weighted sum of
/// `4*lambda*(1 - d) - 2*(D_i - D0_j)^2 * d / lambda` over the data patch,
/// the analogous `s`-term over the smoothness patch, minus
/// `2 * beta * laplacian(lambda)`.
pub fn bandwidth_gradient(state: &SolverState, img: &ColorImage, cfg: &SolverConfig) -> Vec<f64> {
    let alpha = cfg.require_alpha();
    let inp = prepare_inputs(&state.depth_current, &state.depth_init, img, cfg)
        .expect("state and guidance shapes must agree");
    let p = sweep_params(state.depth_current.shape(), &inp.kernel, alpha, cfg);
    let out = fused_sweep::<false, true, false>(
        &inp.cur,
        &inp.d0,
        &inp.col,
        state.bandwidth.values(),
        &p,
    );
    let mut grad = out.grad_pairs;
    let lap = discrete_laplacian(&state.bandwidth);
    let two_beta = 2.0 * cfg.beta;
    for (g, l) in grad.iter_mut().zip(lap) {
        *g -= two_beta * l;
    }
    grad
}

/// One steepest-descent step on the bandwidth field:
/// `clamp(lambda - tau * grad, lambda_min, lambda_max)` per pixel.
pub fn update_bandwidth(bw: &BandwidthField, grad: &[f64], cfg: &SolverConfig) -> BandwidthField {
    assert_eq!(grad.len(), bw.shape().len(), "gradient shape must match");
    let values = bw
        .values()
        .iter()
        .zip(grad)
        .map(|(&l, &g)| (l - cfg.tau * g).clamp(cfg.lambda_min, cfg.lambda_max))
        .collect();
    BandwidthField::from_vec(bw.shape(), values).expect("clamped bandwidths are positive")
}

fn derive_factor(depth: GridShape, guide: GridShape) -> Result<usize> {
    let err = || Error::NonIntegerFactor { guide, depth };
    if !guide.height.is_multiple_of(depth.height) || !guide.width.is_multiple_of(depth.width) {
        return Err(err());
    }
    let fy = guide.height / depth.height;
    let fx = guide.width / depth.width;
    if fy != fx || fy == 0 {
        return Err(err());
    }
    Ok(fy)
}

/// Upsample a low resolution depth map to the guidance image's resolution.
///
/// Initializes with bicubic interpolation and a constant bandwidth field,
/// then repeats: one Jacobi depth update and (when adaptive) one bandwidth
/// descent step, both computed from the same frozen iterate so the robust
/// weights are shared. Stops when `max |delta D| < tol` or at the iteration
/// cap. Returns the final depth, the final bandwidth field, and a report
/// with the objective trace.
pub fn upsample(
    dl: &DepthMap,
    img: &ColorImage,
    cfg: &SolverConfig,
) -> Result<(DepthMap, BandwidthField, UpsampleReport)> {
    cfg.validate()?;
    let factor = derive_factor(dl.shape(), img.shape())?;
    let alpha = cfg.alpha_for(factor);
    let max_iters = cfg.max_iters_for(factor);

    let start = Instant::now();
    let d0 = bicubic_upsample(dl, factor)?;
    let sh = d0.shape();
    let n = sh.len();
    let r = cfg.patch_radius;

    let d0_pad = PaddedScalar::from_grid(d0.values(), sh.height, sh.width, r);
    let col_pad = PaddedColor::from_grid(img.values(), sh.height, sh.width, r);
    let mut cur = PaddedScalar::from_grid(d0.values(), sh.height, sh.width, r);
    let mut cur_vals = d0.values().to_vec();
    let mut lambda = vec![cfg.lambda_init; n];
    let kernel = SpatialKernel::new(r, cfg.sigma_s)?;
    let p = SweepParams {
        h: sh.height,
        w: sh.width,
        radius: r,
        alpha,
        sigma_c: cfg.sigma_c,
        table: kernel.table(),
        z: kernel.normalizer(),
    };

    let mut trace = Vec::with_capacity(max_iters + 1);
    let mut converged = false;
    let mut iters = 0;

    for _ in 0..max_iters {
        let out = if cfg.adaptive_bandwidth {
            fused_sweep::<true, true, true>(&cur, &d0_pad, &col_pad, &lambda, &p)
        } else {
            fused_sweep::<true, false, true>(&cur, &d0_pad, &col_pad, &lambda, &p)
        };
        trace.push(out.obj_pairs + cfg.beta * grad_l2(&lambda, sh.height, sh.width));

        if cfg.adaptive_bandwidth {
            let field = BandwidthField {
                shape: sh,
                values: lambda,
            };
            let lap = discrete_laplacian(&field);
            lambda = field
                .values
                .iter()
                .zip(out.grad_pairs.iter().zip(lap))
                .map(|(&l, (&g, lp))| {
                    (l - cfg.tau * (g - 2.0 * cfg.beta * lp)).clamp(cfg.lambda_min, cfg.lambda_max)
                })
                .collect();
        }

        let delta = cur_vals
            .iter()
            .zip(&out.depth)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        cur_vals = out.depth;
        cur.fill_from(&cur_vals);
        iters += 1;
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }

    let final_pairs = fused_sweep::<false, false, true>(&cur, &d0_pad, &col_pad, &lambda, &p);
    let final_objective = final_pairs.obj_pairs + cfg.beta * grad_l2(&lambda, sh.height, sh.width);
    trace.push(final_objective);

    let depth = DepthMap::from_vec(sh, cur_vals)?;
    let bw = BandwidthField::from_vec(sh, lambda)?;
    let report = UpsampleReport {
        iterations_run: iters,
        final_objective,
        objective_trace: trace,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((depth, bw, report))
}

/// One MRF baseline update step at the given iterate (exposed for the
/// brute-force oracle tests).
pub fn mrf_update(
    depth: &DepthMap,
    depth_init: &DepthMap,
    img: &ColorImage,
    cfg: &SolverConfig,
) -> Result<DepthMap> {
    let sh = depth.shape();
    check_same_shape(sh, depth_init.shape())?;
    check_same_shape(sh, img.shape())?;
    let alpha = cfg.require_alpha();
    let r = cfg.patch_radius;
    let cur = PaddedScalar::from_grid(depth.values(), sh.height, sh.width, r);
    let col = PaddedColor::from_grid(img.values(), sh.height, sh.width, r);
    let (vals, _) = mrf_sweep::<false>(&cur, depth_init.values(), &col, r, alpha, cfg.sigma_c);
    DepthMap::from_vec(sh, vals)
}

/// Upsample with the classic color-weighted MRF model.
///
/// Iterates the fixed-point update of the quadratic MRF energy (pixelwise
/// data term, color-weighted smoothness over the same square patch and
/// `sigma_c` as the robust solver) with the same stopping rule. The report's
/// objective trace holds the MRF energy.
pub fn mrf_upsample(
    dl: &DepthMap,
    img: &ColorImage,
    cfg: &SolverConfig,
) -> Result<(DepthMap, UpsampleReport)> {
    cfg.validate()?;
    let factor = derive_factor(dl.shape(), img.shape())?;
    let alpha = cfg.alpha_for(factor);
    let max_iters = cfg.max_iters_for(factor);

    let start = Instant::now();
    let d0 = bicubic_upsample(dl, factor)?;
    let sh = d0.shape();
    let r = cfg.patch_radius;

    let col = PaddedColor::from_grid(img.values(), sh.height, sh.width, r);
    let mut cur = PaddedScalar::from_grid(d0.values(), sh.height, sh.width, r);
    let mut cur_vals = d0.values().to_vec();

    let mut trace = Vec::with_capacity(max_iters + 1);
    let mut converged = false;
    let mut iters = 0;

    for _ in 0..max_iters {
        let (next, obj) = mrf_sweep::<true>(&cur, d0.values(), &col, r, alpha, cfg.sigma_c);
        trace.push(obj);
        let delta = cur_vals
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        cur_vals = next;
        cur.fill_from(&cur_vals);
        iters += 1;
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }

    let (_next, final_objective) = mrf_sweep::<true>(&cur, d0.values(), &col, r, alpha, cfg.sigma_c);
    trace.push(final_objective);

    let depth = DepthMap::from_vec(sh, cur_vals)?;
    let report = UpsampleReport {
        iterations_run: iters,
        final_objective,
        objective_trace: trace,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((depth, report))
}
