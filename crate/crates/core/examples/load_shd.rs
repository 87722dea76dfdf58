//! Loads an SHD split and bins it. Without an argument, writes a tiny file
//! in the same layout first.
//!
//! cargo run --example load_shd [-- path/to/shd_dir]

use std::path::PathBuf;

use mosaic::data::{bin_spikes, load_shd, synthetic_task, write_shd, BinOptions, Split, SyntheticConfig};

fn main() -> mosaic::Result<()> {
    let dir = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let dir = std::env::temp_dir().join("mosaic_shd_demo");
            std::fs::create_dir_all(&dir).map_err(|e| mosaic::Error::Config(e.to_string()))?;
            let config = SyntheticConfig { train_per_class: 3, test_per_class: 1, ..SyntheticConfig::default() };
            let (train, _) = synthetic_task(&config, 0)?;
            write_shd(&dir.join("shd_train.h5"), &train)?;
            dir
        }
    };
    let data = load_shd(&dir, Split::Train)?;
    let events: usize = data.samples.iter().map(|s| s.times.len()).sum();
    println!("{} samples, {} channels, {} classes, {events} events", data.len(), data.n_channels, data.n_classes);
    let binned = bin_spikes(&data, &BinOptions { n_steps: 100, pool: 5, ..BinOptions::default() })?;
    let active = binned.samples[0].iter().filter(|&&v| v > 0.0).count();
    println!("binned to {} steps x {} channels; sample 0 has {active} active bins", binned.n_steps, binned.n_channels);
    Ok(())
}
