//! File format tour: depth maps as 8/16-bit PGM and the DMF float format,
//! guidance as PPM, config files, and the bandwidth visualization.
//!
//! Run with: cargo run --release --example config_and_formats

use rgdu::image::{denormalize_depth, GridShape};
use rgdu::io::{
    load_config, read_depth, read_depth_auto, save_config, write_bandwidth_visual, write_depth,
    DepthEncoding,
};
use rgdu::pipeline::{make_synthetic_scene, Texture};
use rgdu::solver::{BandwidthField, SolverConfig};

fn main() -> rgdu::Result<()> {
    let dir = std::env::temp_dir().join("rgdu_formats");
    std::fs::create_dir_all(&dir)?;

    let (depth, _) = make_synthetic_scene(GridShape::new(32, 32)?, 0.25, 0, Texture::None, 1)?;

    // Integer encodings quantize with round-half-up and round-trip exactly
    // on their code grid.
    let p8 = dir.join("depth8.pgm");
    write_depth(&depth, &p8, &DepthEncoding::Gray8)?;
    let back8 = read_depth(&p8, &DepthEncoding::Gray8)?;
    assert_eq!(
        denormalize_depth(&back8, 255),
        denormalize_depth(&depth, 255)
    );
    println!("gray8: wrote and re-read {} codes", back8.shape().len());

    let p16 = dir.join("depth16.pgm");
    write_depth(&depth, &p16, &DepthEncoding::Gray16)?;
    let (_, enc) = read_depth_auto(&p16)?;
    assert_eq!(enc, DepthEncoding::Gray16);
    println!("gray16: auto-detected {enc:?}");

    // The float format carries a physical scale for millimeter evaluation.
    let pf = dir.join("depth.dmf");
    write_depth(&depth, &pf, &DepthEncoding::FloatMap { max_mm: Some(1500.0) })?;
    let (_, enc) = read_depth_auto(&pf)?;
    println!("dmf: auto-detected {enc:?}");

    // Config files: unset alpha/max_iters stay on the per-factor schedule.
    let cfg_path = dir.join("solver.cfg");
    let cfg = SolverConfig::default();
    save_config(&cfg, &cfg_path)?;
    let loaded = load_config(&cfg_path)?;
    assert_eq!(loaded, cfg);
    println!("config round-trip:\n{}", std::fs::read_to_string(&cfg_path)?);

    // Bandwidth maps render dark where the bandwidth is narrow.
    let bw = BandwidthField::constant(GridShape::new(32, 32)?, cfg.lambda_init)?;
    write_bandwidth_visual(&bw, cfg.lambda_min, cfg.lambda_max, &dir.join("bw.pgm"))?;
    println!("artifacts in {}", dir.display());
    Ok(())
}
