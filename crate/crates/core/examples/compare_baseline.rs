//! Profile-constrained rewiring against a fixed random mask holding the
//! same number of memory elements, then the aggregated report.
//!
//! cargo run --release --example compare_baseline [-- epochs seeds]

use std::path::Path;

use mosaic::cli::{cmd_report, cmd_train, ExperimentConfig};
use mosaic::rewire::RewireMode;

fn main() -> mosaic::Result<()> {
    let mut config = ExperimentConfig::read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml"))?;
    let arg = |i: usize, default: usize| std::env::args().nth(i).and_then(|a| a.parse().ok()).unwrap_or(default);
    config.train.epochs = arg(1, 30);
    config.experiment.seeds = (0..arg(2, 2) as u64).collect();
    config.rewire.match_memory = true;
    let out = std::env::temp_dir().join("mosaic_compare");
    for mode in [RewireMode::Profile, RewireMode::L1Baseline] {
        cmd_train(&config, mode, &out)?;
    }
    let report = cmd_report(&[out.clone()], Some(&out))?;
    for r in &report.rows {
        println!(
            "{:<12} memory {:>6.0}  accuracy {:.3} +- {:.3} over {} seeds",
            r.mode.as_str(),
            r.memory_mean,
            r.accuracy_mean,
            r.accuracy_std,
            r.n_runs
        );
    }
    for c in &report.comparisons {
        println!("accuracy gain at matched memory: {:+.3}", c.accuracy_gain);
    }
    Ok(())
}
