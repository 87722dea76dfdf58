//! Trains the reference configuration on the synthetic task for one seed
//! and checks the final network against the grid.
//!
//! cargo run --release --example train_synthetic [-- epochs]

use std::path::Path;

use mosaic::cli::{prepare, run_seed, ExperimentConfig};

fn main() -> mosaic::Result<()> {
    let mut config = ExperimentConfig::read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml"))?;
    if let Some(e) = std::env::args().nth(1) {
        config.train.epochs = e.parse().map_err(|_| mosaic::Error::Config(format!("bad epoch count {e}")))?;
    }
    let prepared = prepare(&config)?;
    let out = std::env::temp_dir().join("mosaic_train_synthetic");
    let summary = run_seed(&config, &prepared, &config.target()?, config.rewire.mode, 0, "reference", Some(&out))?;
    println!(
        "{} epochs: test accuracy {:.3}, {} connections, {} memory elements, mappable {}",
        summary.epochs, summary.test_accuracy, summary.active_connections, summary.memory_count, summary.mappable
    );
    println!("run files in {}", out.display());
    Ok(())
}
