//! Compare the robust solver against the bicubic and MRF baselines on one
//! scene across several factors.
//!
//! Run with: cargo run --release --example baseline_comparison

use rgdu::image::GridShape;
use rgdu::pipeline::{
    format_table, make_synthetic_scene, run_benchmark_scenes, DegradeSpec, Method, SceneInput,
    Texture,
};
use rgdu::solver::SolverConfig;

fn main() -> rgdu::Result<()> {
    let shape = GridShape::new(128, 128)?;
    let (depth, color) = make_synthetic_scene(shape, 50.0 / 255.0, 25, Texture::None, 7)?;
    let scenes = vec![SceneInput {
        name: "step_no_guide_edge".into(),
        depth,
        color,
        max_mm: None,
    }];

    let spec = DegradeSpec {
        factor: 2,
        noise_sigma: 5.0 / 255.0,
        rng_seed: 42,
    };
    let report = run_benchmark_scenes(
        &scenes,
        &[2, 4, 8],
        &[Method::Bicubic, Method::Mrf, Method::Ours],
        &SolverConfig::default(),
        &spec,
    );
    print!("{}", format_table(&report.results));
    Ok(())
}
