//! Discontinuity probe: a depth step with no guidance edge anywhere near
//! it. Purely color-driven smoothing averages straight across the step; the
//! robust solver keeps it because the smoothness weights also read the depth
//! map itself, and the adapted bandwidth narrows at the step.
//!
//! Run with: cargo run --release --example edge_preserve_probe

use rgdu::image::{DepthMap, GridShape};
use rgdu::pipeline::{degrade, make_synthetic_scene, rmse, DegradeSpec, RmseScale, Texture};
use rgdu::solver::{mrf_upsample, upsample, BandwidthField, SolverConfig};

/// Mean step height across the depth boundary at width/2, band means over
/// 3 columns on each side.
fn edge_height(map: &DepthMap) -> f64 {
    let sh = map.shape();
    let e = sh.width / 2;
    let mut acc = 0.0;
    for y in 0..sh.height {
        let left: f64 = (e - 4..e - 1).map(|x| map.get(y, x)).sum::<f64>() / 3.0;
        let right: f64 = (e + 1..e + 4).map(|x| map.get(y, x)).sum::<f64>() / 3.0;
        acc += (right - left).abs();
    }
    acc / sh.height as f64
}

fn mean_bandwidth(bw: &BandwidthField, cols: std::ops::Range<usize>) -> f64 {
    let sh = bw.shape();
    let mut acc = 0.0;
    let mut n = 0;
    for y in 0..sh.height {
        for x in cols.clone() {
            acc += bw.get(y, x);
            n += 1;
        }
    }
    acc / n as f64
}

fn main() -> rgdu::Result<()> {
    let shape = GridShape::new(128, 128)?;
    let step = 50.0 / 255.0;
    // Guidance edge displaced 25 px from the depth edge: no color cue where
    // the depth changes.
    let (gt, guide) = make_synthetic_scene(shape, step, 25, Texture::None, 7)?;
    let spec = DegradeSpec {
        factor: 4,
        noise_sigma: 5.0 / 255.0,
        rng_seed: 42,
    };
    let lr = degrade(&gt, &spec)?;
    let cfg = SolverConfig::default();

    let (ours, bw, _) = upsample(&lr, &guide, &cfg)?;
    let (mrf, _) = mrf_upsample(&lr, &guide, &cfg)?;
    let bicubic = rgdu::image::bicubic_upsample(&lr, 4)?;

    println!("true step height: {:.4}", step);
    println!("ours step height: {:.4}", edge_height(&ours));
    println!("mrf  step height: {:.4}", edge_height(&mrf));
    println!();
    println!("RMSE [0,255]  ours: {:.2}  mrf: {:.2}  bicubic: {:.2}",
        rmse(&ours, &gt, RmseScale::Unit255)?,
        rmse(&mrf, &gt, RmseScale::Unit255)?,
        rmse(&bicubic, &gt, RmseScale::Unit255)?,
    );

    let e = shape.width / 2;
    let at_edge = mean_bandwidth(&bw, e - 2..e + 2);
    let flat = mean_bandwidth(&bw, 12..44);
    println!();
    println!("mean bandwidth at the step: {:.5}", at_edge);
    println!("mean bandwidth in flat region: {:.5}", flat);
    println!("bandwidth narrows at the discontinuity: {}", at_edge < flat);
    Ok(())
}
