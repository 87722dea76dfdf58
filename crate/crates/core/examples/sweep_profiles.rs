//! A small grid over p_1 and p_3 with a few epochs per cell.
//!
//! cargo run --release --example sweep_profiles

use std::path::Path;

use mosaic::cli::{cmd_sweep, ExperimentConfig, SweepSection};

fn main() -> mosaic::Result<()> {
    let mut config = ExperimentConfig::read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml"))?;
    config.train.epochs = 10;
    config.data.synthetic.train_per_class = 30;
    config.sweep = Some(SweepSection {
        p1: vec![0.05, 0.2],
        p3: vec![0.0, 0.05],
        base: config.profile.target.clone(),
        seeds_per_cell: 1,
    });
    let out = std::env::temp_dir().join("mosaic_sweep");
    for cell in cmd_sweep(&config, config.rewire.mode, &out)? {
        println!(
            "{:<20} accuracy {:.3}  memory {:>6.0}  mappable {}",
            cell.cell, cell.accuracy_mean, cell.memory_mean, cell.all_mappable
        );
    }
    Ok(())
}
