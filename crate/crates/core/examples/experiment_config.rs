//! Loads a JSON experiment, prints its table row and the start of its trajectory CSV.
//!
//! `cargo run --example experiment_config -- crates/core/configs/gc_constant.json`

use std::path::PathBuf;

use fliess::harness::{emit_trajectory, run_experiment, ExperimentConfig, REPORT_HEADER};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/gc_constant.json"));
    let cfg = ExperimentConfig::load(&path)?;
    let report = run_experiment(&cfg)?;
    println!("{REPORT_HEADER}\n{}", report.csv_row());
    for w in &report.warnings {
        println!("warning: {w}");
    }
    for line in emit_trajectory(&cfg, 10)?.lines() {
        println!("{line}");
    }
    Ok(())
}
