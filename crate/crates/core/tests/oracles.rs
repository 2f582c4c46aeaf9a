//! Single-step updates and the objective against independent brute-force
//! double-loop evaluations.

mod common;

use common::{naive_mrf_update, naive_objective, naive_robust_update, rand_bandwidth, rand_color, rand_depth};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rgdu::image::GridShape;
use rgdu::solver::{mrf_update, objective, update_depth, SolverConfig, SolverState};

fn shape(n: usize) -> GridShape {
    GridShape::new(n, n).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn check_robust_step(n: usize, radius: usize, seed: u64) {
    let sh = shape(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rand_depth(sh, &mut rng);
    let d0 = rand_depth(sh, &mut rng);
    let img = rand_color(sh, &mut rng);
    let bw = rand_bandwidth(sh, 5.0 / 255.0, 50.0 / 255.0, &mut rng);
    let cfg = SolverConfig {
        alpha: Some(0.9),
        patch_radius: radius,
        ..SolverConfig::default()
    };

    let mut state = SolverState::new(d0.clone(), bw.clone()).unwrap();
    state.depth_current = d.clone();
    let got = update_depth(&state, &img, &cfg);
    let want = naive_robust_update(&d, &d0, &img, &bw, 0.9, cfg.sigma_s, cfg.sigma_c, radius);
    let diff = max_abs_diff(got.values(), &want);
    assert!(diff < 1e-12, "{n}x{n} r={radius}: max diff {diff:e}");
}

fn check_mrf_step(n: usize, radius: usize, seed: u64) {
    let sh = shape(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rand_depth(sh, &mut rng);
    let d0 = rand_depth(sh, &mut rng);
    let img = rand_color(sh, &mut rng);
    let cfg = SolverConfig {
        alpha: Some(0.9),
        patch_radius: radius,
        ..SolverConfig::default()
    };

    let got = mrf_update(&d, &d0, &img, &cfg).unwrap();
    let want = naive_mrf_update(&d, &d0, &img, 0.9, cfg.sigma_c, radius);
    let diff = max_abs_diff(got.values(), &want);
    assert!(diff < 1e-12, "{n}x{n} r={radius}: max diff {diff:e}");
}

#[test]
fn robust_update_matches_naive_4x4() {
    // Radius 9 on a 4x4 grid clamps every offset; radius 2 mixes interior
    // and border handling.
    check_robust_step(4, 9, 101);
    check_robust_step(4, 2, 102);
}

#[test]
fn robust_update_matches_naive_16x16() {
    check_robust_step(16, 9, 103);
    check_robust_step(16, 3, 104);
}

#[test]
fn mrf_update_matches_naive_4x4() {
    check_mrf_step(4, 9, 201);
    check_mrf_step(4, 2, 202);
}

#[test]
fn mrf_update_matches_naive_16x16() {
    check_mrf_step(16, 9, 203);
    check_mrf_step(16, 3, 204);
}

#[test]
fn objective_matches_naive_3x3_at_initial_depth() {
    let sh = shape(3);
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let d0 = rand_depth(sh, &mut rng);
    let img = rand_color(sh, &mut rng);
    let bw = rgdu::solver::BandwidthField::constant(sh, 7.0 / 255.0).unwrap();
    let cfg = SolverConfig {
        alpha: Some(0.9),
        patch_radius: 1,
        ..SolverConfig::default()
    };
    let got = objective(&d0, &d0, &img, &bw, &cfg).unwrap();
    let want = naive_objective(
        &d0, &d0, &img, &bw, 0.9, cfg.beta, cfg.sigma_s, cfg.sigma_c, 1,
    );
    assert!(
        (got - want).abs() < 1e-12,
        "objective {got} vs naive {want}"
    );
}

#[test]
fn objective_matches_naive_on_random_instances() {
    for seed in [401, 402, 403] {
        let sh = shape(8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rand_depth(sh, &mut rng);
        let d0 = rand_depth(sh, &mut rng);
        let img = rand_color(sh, &mut rng);
        let bw = rand_bandwidth(sh, 2.0 / 255.0, 50.0 / 255.0, &mut rng);
        let cfg = SolverConfig {
            alpha: Some(0.8),
            patch_radius: 4,
            ..SolverConfig::default()
        };
        let got = objective(&d, &d0, &img, &bw, &cfg).unwrap();
        let want = naive_objective(
            &d, &d0, &img, &bw, 0.8, cfg.beta, cfg.sigma_s, cfg.sigma_c, 4,
        );
        let rel = (got - want).abs() / want.abs().max(1e-12);
        assert!(rel < 1e-12, "seed {seed}: {got} vs {want}, rel {rel:e}");
    }
}

#[test]
fn mrf_and_robust_agree_in_the_flattened_limit() {
    // With a flat spatial window, a huge bandwidth (d = s = 1) and a
    // near-constant state, the robust update degenerates to the MRF
    // structure; outputs must agree.
    let sh = shape(8);
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    let img = rand_color(sh, &mut rng);
    let base = 0.5;
    let vals: Vec<f64> = (0..sh.len())
        .map(|_| base + rng.gen_range(-1e-8..1e-8))
        .collect();
    let d = rgdu::image::DepthMap::from_vec(sh, vals).unwrap();
    let cfg = SolverConfig {
        alpha: Some(0.9),
        patch_radius: 3,
        sigma_s: 1e6,
        lambda_init: 0.99e6,
        lambda_max: 1e6,
        ..SolverConfig::default()
    };
    let bw = rgdu::solver::BandwidthField::constant(sh, cfg.lambda_max).unwrap();
    let mut state = SolverState::new(d.clone(), bw).unwrap();
    state.depth_current = d.clone();
    let ours = update_depth(&state, &img, &cfg);
    let mrf = mrf_update(&d, &d, &img, &cfg).unwrap();
    let diff = max_abs_diff(ours.values(), mrf.values());
    assert!(diff < 1e-6, "flattened-limit disagreement {diff:e}");

    // Weight-level form of the same claim: with the window flattened and
    // the robust factor saturated at 1, the combined smoothness weight is
    // the MRF color weight up to the window normalization.
    let kernel = rgdu::kernels::SpatialKernel::new(3, cfg.sigma_s).unwrap();
    let params = rgdu::kernels::RobustNormParams::new(cfg.lambda_max).unwrap();
    let patch = 49.0;
    for (i, j) in [((4i64, 4i64), (5i64, 6i64)), ((4, 4), (2, 3)), ((4, 4), (4, 4))] {
        let combined = rgdu::kernels::combined_weight(&img, i, j, &kernel, cfg.sigma_c).unwrap();
        let s = rgdu::kernels::exp_error_norm_deriv(1e-16, &params);
        let wc = rgdu::kernels::color_weight(
            &img,
            (i.0 as usize, i.1 as usize),
            (j.0 as usize, j.1 as usize),
            cfg.sigma_c,
        );
        let rel = (patch * combined * s - wc).abs() / wc;
        assert!(rel < 1e-6, "weight mismatch at {i:?},{j:?}: rel {rel:e}");
    }
}
