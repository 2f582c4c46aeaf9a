//! Full benchmark run over the built-in probe scenes with the JSONL report,
//! the library-level counterpart of `rgdu bench --synthetic`.
//!
//! Run with: cargo run --release --example benchmark_table

use rgdu::pipeline::{
    format_table, run_benchmark_scenes, synthetic_scenes, write_jsonl, DegradeSpec, Method,
};
use rgdu::solver::SolverConfig;

fn main() -> rgdu::Result<()> {
    let scenes = synthetic_scenes();
    let spec = DegradeSpec {
        factor: 2,
        noise_sigma: 5.0 / 255.0,
        rng_seed: 42,
    };
    let report = run_benchmark_scenes(
        &scenes,
        &[2, 4],
        &[Method::Bicubic, Method::Mrf, Method::Ours],
        &SolverConfig::default(),
        &spec,
    );

    print!("{}", format_table(&report.results));
    for e in &report.errors {
        eprintln!("scene error: {}: {}", e.scene, e.error);
    }

    let path = std::env::temp_dir().join("rgdu_bench.jsonl");
    let mut file = std::fs::File::create(&path)?;
    write_jsonl(&report, &mut file)?;
    println!("\nmachine-readable report: {}", path.display());
    Ok(())
}
