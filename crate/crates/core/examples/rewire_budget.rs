//! Trains a small network with per-distance rewiring and shows that
//! pruning and regrowth never change the per-distance connection counts.
//!
//! cargo run --release --example rewire_budget

use mosaic::data::{bin_spikes, synthetic_task, BinOptions, SyntheticConfig};
use mosaic::fabric::Fabric;
use mosaic::profile::SparsityProfile;
use mosaic::rewire::{init_weights, InitScales, RewireState};
use mosaic::snn::{train, LifParams, OptimizerConfig, TrainConfig};
use mosaic::topology::{GridConfig, InputPlacement};

fn main() -> mosaic::Result<()> {
    let synth = SyntheticConfig { n_channels: 32, train_per_class: 20, test_per_class: 5, ..SyntheticConfig::default() };
    let (train_raw, test_raw) = synthetic_task(&synth, 0)?;
    let bins = BinOptions { n_steps: 50, ..BinOptions::default() };
    let (train_set, test_set) = (bin_spikes(&train_raw, &bins)?.to_dataset(), bin_spikes(&test_raw, &bins)?.to_dataset());

    let fabric = Fabric::new(GridConfig::new(2, 2, 16, 80, 64)?, 32, InputPlacement::RoundRobin, false)?;
    let target = SparsityProfile::new(vec![0.3, 0.1, 0.0, 0.05])?.fitted(fabric.grid().d_max() + 1)?;
    let state = RewireState::profile(&fabric.buckets, &target, 1e-3, 1e-5)?;
    let scales = InitScales { input: 3.0, recurrent: 1.0, readout: 0.05 };
    let params = init_weights(&state, &scales, fabric.input_mask(), synth.n_classes, 0)?;
    let config = TrainConfig {
        epochs: 10,
        batch_size: 16,
        optimizer: OptimizerConfig::Adam { lr: 3e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 },
        map_every: 5,
    };
    let out = train(params, &state, &train_set, &test_set, &LifParams::default(), &config, Some(fabric.mapping()), 0)?;

    println!("targets per distance: {:?}", state.targets());
    println!("{:>5} {:>9} {:>7} {:>7} {:>10}  counts", "epoch", "test acc", "pruned", "regrown", "on budget");
    for r in &out.log.records {
        println!("{:>5} {:>9.3} {:>7} {:>7} {:>10}  {}", r.epoch, r.test_accuracy, r.pruned, r.regrown, r.on_budget, r.counts);
    }
    Ok(())
}
