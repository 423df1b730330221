//! Runs an experiment config and prints its checks.
//!
//! `cargo run --release --example run_experiment -- crates/core/configs/two_bases.json`

use incompat::harness::{run_experiment, ExperimentConfig};

fn main() -> incompat::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/kesten_mckay.json").to_string());
    let mut cfg = ExperimentConfig::from_path(&path)?;
    cfg.output_path = None;
    let report = run_experiment(&cfg)?;
    for c in &report.checks {
        println!(
            "{} {} = {:.5} (target {:?} {})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.relation,
            c.target
        );
    }
    for a in report.aggregates.iter().take(12) {
        println!("d={} slot={:?} {}: mean {:.5} sd {:.5}", a.d, a.slot, a.key, a.mean, a.stddev);
    }
    println!("{} records, {} excluded, {:.1}s", report.records.len(), report.excluded, report.wall_clock_secs);
    Ok(())
}
