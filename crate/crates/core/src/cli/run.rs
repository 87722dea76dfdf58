use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{DataSource, ExperimentConfig};
use crate::container::{Array, ArrayData, Container};
use crate::data::{bin_spikes, synthetic_task, BinnedDataset};
use crate::error::{Error, Result};
use crate::fabric::Fabric;
use crate::mask::{triplets_from, write_triplets, Mask};
use crate::profile::{measure_profile, sample_groups, SparsityProfile};
use crate::rewire::{init_weights, write_events_csv, RewireMode, RewireState};
use crate::seed::derive_seed;
use crate::snn::{train, Dataset, NetworkParams, TrainStatus};

/// Fabric and data shared by every run of one configuration.
pub struct Prepared {
    pub fabric: Fabric,
    pub train: Dataset,
    pub test: Dataset,
    pub n_classes: usize,
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let (train_set, test_set) = load_binned(config)?;
    if train_set.n_channels != config.input_channels() {
        return Err(Error::Config(format!(
            "data has {} channels after pooling, configuration expects {}",
            train_set.n_channels,
            config.input_channels()
        )));
    }
    let fabric = Fabric::new(config.grid, train_set.n_channels, config.input.placement, config.profile.allow_self)?;
    Ok(Prepared { fabric, n_classes: train_set.n_classes, train: train_set.to_dataset(), test: test_set.to_dataset() })
}

/// Binned train and test splits, through the cache when one is configured.
pub fn load_binned(config: &ExperimentConfig) -> Result<(BinnedDataset, BinnedDataset)> {
    let data = &config.data;
    let opts = &data.binning;
    let tag = match data.source {
        DataSource::Synthetic => format!("synthetic_{}", data.seed),
        DataSource::Shd => "shd".to_string(),
    };
    let stem = format!("{tag}_{}steps_pool{}_{}", opts.n_steps, opts.pool, if opts.clip { "clip" } else { "counts" });
    if let Some(dir) = &data.cache {
        let (a, b) = (dir.join(format!("{stem}_train")), dir.join(format!("{stem}_test")));
        if a.with_extension("json").is_file() && b.with_extension("json").is_file() {
            return Ok((BinnedDataset::read(&a)?, BinnedDataset::read(&b)?));
        }
    }
    let (train_raw, test_raw) = match data.source {
        DataSource::Synthetic => synthetic_task(&data.synthetic, data.seed)?,
        #[cfg(feature = "shd")]
        DataSource::Shd => {
            let path = data.path.as_deref().ok_or_else(|| Error::Config("data.path is required for SHD".into()))?;
            (crate::data::load_shd(path, crate::data::Split::Train)?, crate::data::load_shd(path, crate::data::Split::Test)?)
        }
        #[cfg(not(feature = "shd"))]
        DataSource::Shd => return Err(Error::Config("built without the `shd` feature".into())),
    };
    let truncate = |mut d: crate::data::SpikeDataset, max: Option<usize>| {
        if let Some(m) = max {
            d.samples.truncate(m);
            d.labels.truncate(m);
        }
        d
    };
    let train_set = bin_spikes(&truncate(train_raw, data.max_train), opts)?;
    let test_set = bin_spikes(&truncate(test_raw, data.max_test), opts)?;
    if let Some(dir) = &data.cache {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        train_set.write(&dir.join(format!("{stem}_train")), opts)?;
        test_set.write(&dir.join(format!("{stem}_test")), opts)?;
    }
    Ok((train_set, test_set))
}

/// Largest global connection count whose random mask (drawn as in
/// [`init_weights`]) uses at most `memory` memory elements.
pub fn matched_global_count(fabric: &Fabric, memory: usize, seed: u64) -> Result<usize> {
    let state = RewireState::global_count(RewireMode::Global, &fabric.buckets, 0, 0.0, 0.0)?;
    let pairs = vec![state.eligible(0).to_vec()];
    let memory_of = |k: usize| -> Result<usize> {
        let mask = sample_groups(fabric.n_neurons(), &pairs, &[k], derive_seed(seed, 0));
        Ok(fabric.check(&mask)?.memory_count)
    };
    let (mut lo, mut hi) = (0, pairs[0].len());
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if memory_of(mid)? <= memory {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// Budget bookkeeping for `mode`.
pub fn build_state(config: &ExperimentConfig, fabric: &Fabric, target: &SparsityProfile, mode: RewireMode, seed: u64) -> Result<RewireState> {
    let threshold = config.prune_threshold();
    let lambda = config.rewire.lambda_l1;
    let profile_state = RewireState::profile(&fabric.buckets, target, threshold, lambda)?;
    if mode == RewireMode::Profile {
        return Ok(profile_state);
    }
    let count = if config.rewire.match_memory {
        let init = init_weights(&profile_state, &config.init.into(), fabric.input_mask(), 1, seed)?;
        matched_global_count(fabric, fabric.check(&init.rec_mask)?.memory_count, seed)?
    } else if let Some(density) = config.rewire.density {
        let n = fabric.n_neurons();
        (density * (n * n) as f64).round_ties_even() as usize
    } else {
        profile_state.targets().iter().sum()
    };
    RewireState::global_count(mode, &fabric.buckets, count, threshold, lambda)
}

/// Outcome of one training run, written as `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    /// Profile cell label; the run name outside sweeps.
    pub cell: String,
    pub mode: RewireMode,
    pub seed: u64,
    pub epochs: usize,
    pub completed: bool,
    pub message: Option<String>,
    pub test_accuracy: f64,
    pub train_accuracy: f64,
    pub active_connections: usize,
    pub memory_count: usize,
    pub mappable: bool,
    pub peak_nt_fanin: usize,
    pub peak_rt_load: usize,
    /// Every logged epoch on budget with no weight outside the mask.
    pub always_on_budget: bool,
    pub target: Vec<f64>,
    pub measured: Vec<f64>,
}

/// Trains one seed. With `out`, writes the training log, rewiring events,
/// final mask, checkpoint, mappability report and summary there.
pub fn run_seed(
    config: &ExperimentConfig,
    prepared: &Prepared,
    target: &SparsityProfile,
    mode: RewireMode,
    seed: u64,
    cell: &str,
    out: Option<&Path>,
) -> Result<RunSummary> {
    let fabric = &prepared.fabric;
    let state = build_state(config, fabric, target, mode, seed)?;
    let params = init_weights(&state, &config.init.into(), fabric.input_mask(), prepared.n_classes, seed)?;
    let outcome = train(
        params,
        &state,
        &prepared.train,
        &prepared.test,
        &config.snn,
        &config.train_config(),
        Some(fabric.mapping()),
        seed,
    )?;
    let report = fabric.check(&outcome.params.rec_mask)?;
    let last = outcome.log.last().expect("log holds the initial evaluation");
    let (completed, message) = match &outcome.status {
        TrainStatus::Completed => (true, None),
        TrainStatus::Diverged { epoch, message } => (false, Some(format!("diverged in epoch {epoch}: {message}"))),
    };
    let summary = RunSummary {
        name: config.experiment.name.clone(),
        cell: cell.to_string(),
        mode,
        seed,
        epochs: last.epoch,
        completed,
        message,
        test_accuracy: last.test_accuracy,
        train_accuracy: last.train_accuracy,
        active_connections: outcome.params.rec_mask.count(),
        memory_count: report.memory_count,
        mappable: report.mappable,
        peak_nt_fanin: report.peak_nt_fanin,
        peak_rt_load: report.peak_rt_load,
        always_on_budget: outcome.log.records.iter().all(|r| r.on_budget),
        target: target.as_slice().to_vec(),
        measured: measure_profile(&outcome.params.rec_mask, &fabric.buckets)?.as_slice().to_vec(),
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        outcome.log.write_csv(&dir.join("log.csv"))?;
        write_events_csv(&dir.join("rewire.csv"), &outcome.log.events)?;
        write_triplets(&dir.join("mask.txt"), &triplets_from(&outcome.params.rec_mask, Some(&outcome.params.w_rec)))?;
        write_checkpoint(&dir.join("checkpoint"), &outcome.params, config, seed)?;
        write_json(&dir.join("report.json"), &report)?;
        write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok(summary)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn mask_bits(mask: &Mask) -> ArrayData {
    ArrayData::U8((0..mask.rows() * mask.cols()).map(|i| mask.get_flat(i) as u8).collect())
}

/// Weights and masks in the flat container, with the neuron constants and
/// the full configuration in the sidecar.
pub fn write_checkpoint(base: &Path, params: &NetworkParams, config: &ExperimentConfig, seed: u64) -> Result<()> {
    let (c, n, k) = (params.n_inputs, params.n_neurons, params.n_classes);
    let mut container = Container::new(json!({
        "seed": seed,
        "n_inputs": c,
        "n_neurons": n,
        "n_classes": k,
        "lif": config.snn,
        "config": config,
    }));
    container.insert("w_in", Array::new(vec![c, n], ArrayData::F64(params.w_in.clone()))?);
    container.insert("w_rec", Array::new(vec![n, n], ArrayData::F64(params.w_rec.clone()))?);
    container.insert("w_out", Array::new(vec![n, k], ArrayData::F64(params.w_out.clone()))?);
    container.insert("in_mask", Array::new(vec![c, n], mask_bits(&params.in_mask))?);
    container.insert("rec_mask", Array::new(vec![n, n], mask_bits(&params.rec_mask))?);
    container.write(base)
}

pub fn read_checkpoint(base: &Path) -> Result<NetworkParams> {
    let c = Container::read(base)?;
    let dim = |k: &str| c.meta[k].as_u64().map(|v| v as usize).ok_or_else(|| Error::format(base, format!("missing `{k}`")));
    let (n_in, n, k) = (dim("n_inputs")?, dim("n_neurons")?, dim("n_classes")?);
    let floats = |name: &str| match &c.get(name)?.data {
        ArrayData::F64(v) => Ok(v.clone()),
        _ => Err(Error::format(base, format!("`{name}` is not f64"))),
    };
    let mask = |name: &str, rows: usize, cols: usize| match &c.get(name)?.data {
        ArrayData::U8(bits) if bits.len() == rows * cols => {
            let mut m = Mask::new(rows, cols);
            for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b != 0) {
                m.insert(i / cols, i % cols);
            }
            Ok(m)
        }
        _ => Err(Error::format(base, format!("`{name}` is not a {rows}x{cols} u8 mask"))),
    };
    let params = NetworkParams {
        n_inputs: n_in,
        n_neurons: n,
        n_classes: k,
        w_in: floats("w_in")?,
        in_mask: mask("in_mask", n_in, n)?,
        w_rec: floats("w_rec")?,
        rec_mask: mask("rec_mask", n, n)?,
        w_out: floats("w_out")?,
    };
    if params.w_in.len() != n_in * n || params.w_rec.len() != n * n || params.w_out.len() != n * k {
        return Err(Error::format(base, "weight shapes do not match"));
    }
    Ok(params)
}
