//! Validate the analytic bandwidth gradient against central finite
//! differences of the objective on a random instance (the library-level
//! counterpart of `rgdu gradcheck`).
//!
//! Run with: cargo run --release --example gradient_check

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgdu::image::{ColorImage, DepthMap, GridShape};
use rgdu::solver::{bandwidth_gradient, objective, BandwidthField, SolverConfig, SolverState};

fn main() -> rgdu::Result<()> {
    let n = 8;
    let sh = GridShape::new(n, n)?;
    let cfg = SolverConfig {
        alpha: Some(0.9),
        ..SolverConfig::default()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let d = DepthMap::from_vec(sh, (0..sh.len()).map(|_| rng.gen()).collect())?;
    let d0 = DepthMap::from_vec(sh, (0..sh.len()).map(|_| rng.gen()).collect())?;
    let img = ColorImage::from_vec(
        sh,
        (0..sh.len())
            .map(|_| [rng.gen(), rng.gen(), rng.gen()])
            .collect(),
    )?;
    let lambda: Vec<f64> = (0..sh.len())
        .map(|_| rng.gen_range(2.0 / 255.0..49.0 / 255.0))
        .collect();
    let bw = BandwidthField::from_vec(sh, lambda)?;

    let mut state = SolverState::new(d0.clone(), bw.clone())?;
    state.depth_current = d.clone();
    let analytic = bandwidth_gradient(&state, &img, &cfg);

    let h = 1e-6;
    let mut max_rel = 0.0f64;
    for i in 0..sh.len() {
        let probe = |delta: f64| -> rgdu::Result<f64> {
            let mut vals = bw.values().to_vec();
            vals[i] += delta;
            objective(&d, &d0, &img, &BandwidthField::from_vec(sh, vals)?, &cfg)
        };
        let fd = (probe(h)? - probe(-h)?) / (2.0 * h);
        let rel = (analytic[i] - fd).abs() / analytic[i].abs().max(fd.abs()).max(1e-8);
        max_rel = max_rel.max(rel);
    }
    println!("max relative error over {} bandwidths: {max_rel:.3e}", sh.len());
    assert!(max_rel < 1e-4);
    println!("analytic gradient matches finite differences");
    Ok(())
}
