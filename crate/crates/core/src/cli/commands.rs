use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{prepare, run_seed, write_json, RunSummary};
use crate::error::{Error, Result};
use crate::fabric::Fabric;
use crate::mask::{mask_from_triplets, read_triplets};
use crate::profile::{estimate_required_resources, ResourceEstimate};
use crate::rewire::RewireMode;
use crate::router::{compute_occupancy, MappabilityReport};

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs `f` on a pool of `workers` threads (0 = one per core).
fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn fabric_for(config: &ExperimentConfig) -> Result<Fabric> {
    Fabric::new(config.grid, config.input_channels(), config.input.placement, config.profile.allow_self)
}

/// Maps a triplet mask file onto the configured grid. With `out`, writes
/// `report.json` and the per-tile `occupancy.csv`.
pub fn cmd_map(config: &ExperimentConfig, mask_file: &Path, out: Option<&Path>) -> Result<MappabilityReport> {
    let fabric = fabric_for(config)?;
    let triplets = read_triplets(mask_file)?;
    let mask = mask_from_triplets(fabric.n_neurons(), &triplets)?;
    let report = fabric.check(&mask)?;
    if let Some(dir) = out {
        create_dir(dir)?;
        write_json(&dir.join("report.json"), &report)?;
        let mut occupancy = compute_occupancy(&mask, &fabric.placement, &fabric.lattice)?;
        occupancy.add_inputs(&fabric.inputs);
        occupancy.write_csv(&dir.join("occupancy.csv"))?;
    }
    Ok(report)
}

/// Resource estimate of the configured target profile, written to
/// `estimate.csv` under `out`.
pub fn cmd_estimate(config: &ExperimentConfig, seed: u64, out: Option<&Path>) -> Result<ResourceEstimate> {
    let fabric = fabric_for(config)?;
    let target = config.target()?;
    let estimate = estimate_required_resources(
        &target,
        &fabric.placement,
        &fabric.lattice,
        &fabric.buckets,
        config.profile.n_samples,
        seed,
    )?;
    if let Some(dir) = out {
        create_dir(dir)?;
        estimate.write_csv(&dir.join("estimate.csv"), &target)?;
    }
    Ok(estimate)
}

fn write_summaries(path: &Path, runs: &[RunSummary]) -> Result<()> {
    let err = |e| crate::router::csv_error(path, e);
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record([
        "name", "cell", "mode", "seed", "epochs", "completed", "test_accuracy", "train_accuracy",
        "active_connections", "memory_count", "mappable", "peak_nt_fanin", "peak_rt_load",
    ])
    .map_err(err)?;
    for r in runs {
        w.write_record([
            r.name.clone(),
            r.cell.clone(),
            r.mode.as_str().to_string(),
            r.seed.to_string(),
            r.epochs.to_string(),
            r.completed.to_string(),
            r.test_accuracy.to_string(),
            r.train_accuracy.to_string(),
            r.active_connections.to_string(),
            r.memory_count.to_string(),
            r.mappable.to_string(),
            r.peak_nt_fanin.to_string(),
            r.peak_rt_load.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Trains every seed of the configuration in `mode`; runs land in
/// `<out>/<mode>/seed_<s>/`. Results are in seed order whatever the
/// schedule.
pub fn cmd_train(config: &ExperimentConfig, mode: RewireMode, out: &Path) -> Result<Vec<RunSummary>> {
    let prepared = prepare(config)?;
    let target = config.target()?;
    let dir = out.join(mode.as_str());
    create_dir(&dir)?;
    let runs = with_pool(config.experiment.workers, || {
        config
            .experiment
            .seeds
            .par_iter()
            .map(|&seed| {
                let run_dir = dir.join(format!("seed_{seed}"));
                run_seed(config, &prepared, &target, mode, seed, &config.experiment.name, Some(&run_dir))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    write_summaries(&dir.join("summary.csv"), &runs)?;
    Ok(runs)
}

/// Mean and spread of one sweep cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: String,
    pub mode: RewireMode,
    pub p_1: f64,
    pub p_3: f64,
    pub n_seeds: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub memory_mean: f64,
    pub all_mappable: bool,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Trains every `(p_1, p_3)` cell of `[sweep]` with `seeds_per_cell` seeds
/// starting at the first configured seed. Writes `sweep.csv` plus one run
/// directory per cell and seed.
pub fn cmd_sweep(config: &ExperimentConfig, mode: RewireMode, out: &Path) -> Result<Vec<CellSummary>> {
    let sweep = config.sweep.clone().ok_or_else(|| Error::Config("no [sweep] section".into()))?;
    let prepared = prepare(config)?;
    let cells = sweep.cells(config.grid.d_max() + 1)?;
    let first = config.experiment.seeds[0];
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..sweep.seeds_per_cell as u64).map(move |s| (c, first + s)))
        .collect();
    let label = |c: usize| format!("p1={},p3={}", cells[c].get(1), cells[c].get(3));
    let dir = out.join("sweep").join(mode.as_str());
    create_dir(&dir)?;
    let runs = with_pool(config.experiment.workers, || {
        jobs.par_iter()
            .map(|&(c, seed)| {
                let run_dir = dir.join(label(c)).join(format!("seed_{seed}"));
                run_seed(config, &prepared, &cells[c], mode, seed, &label(c), Some(&run_dir))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    write_summaries(&dir.join("runs.csv"), &runs)?;
    let summaries: Vec<CellSummary> = (0..cells.len())
        .map(|c| {
            let cell: Vec<&RunSummary> = runs.iter().filter(|r| r.cell == label(c)).collect();
            let acc: Vec<f64> = cell.iter().map(|r| r.test_accuracy).collect();
            let mem: Vec<f64> = cell.iter().map(|r| r.memory_count as f64).collect();
            let (accuracy_mean, accuracy_std) = mean_std(&acc);
            CellSummary {
                cell: label(c),
                mode,
                p_1: cells[c].get(1),
                p_3: cells[c].get(3),
                n_seeds: cell.len(),
                accuracy_mean,
                accuracy_std,
                memory_mean: mean_std(&mem).0,
                all_mappable: cell.iter().all(|r| r.mappable),
            }
        })
        .collect();
    let path = dir.join("sweep.csv");
    let err = |e| crate::router::csv_error(&path, e);
    let mut w = csv::Writer::from_path(&path).map_err(err)?;
    for s in &summaries {
        w.serialize(s).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(summaries)
}

/// Accuracy against memory for one `(mode, cell)` group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub mode: RewireMode,
    pub cell: String,
    pub n_runs: usize,
    pub memory_mean: f64,
    pub memory_std: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
}

/// A profile-mode group against the baseline group closest in memory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub profile_cell: String,
    pub baseline_cell: String,
    pub profile_memory: f64,
    pub baseline_memory: f64,
    pub profile_accuracy: f64,
    pub baseline_accuracy: f64,
    pub accuracy_gain: f64,
}

/// Smallest memory each mode needs to reach the highest accuracy level
/// both modes attain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoAccuracy {
    pub accuracy: f64,
    pub profile_memory: f64,
    pub baseline_memory: f64,
    /// `baseline_memory / profile_memory`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub comparisons: Vec<Comparison>,
    pub iso_accuracy: Option<IsoAccuracy>,
}

fn find_summaries(dir: &Path, found: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            find_summaries(&path, found)?;
        } else if path.file_name().is_some_and(|n| n == "summary.json") {
            found.push(path);
        }
    }
    Ok(())
}

/// Aggregates the `summary.json` files found under `dirs`. With `out`,
/// writes `report.csv` and `report.json`.
pub fn cmd_report(dirs: &[PathBuf], out: Option<&Path>) -> Result<Report> {
    let mut missing = Vec::new();
    let mut files = Vec::new();
    for dir in dirs {
        let before = files.len();
        if dir.is_dir() {
            find_summaries(dir, &mut files)?;
        }
        if files.len() == before {
            missing.push(dir.join("summary.json"));
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingFiles(missing));
    }
    let mut groups: BTreeMap<(RewireMode, String), Vec<RunSummary>> = BTreeMap::new();
    for path in &files {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let run: RunSummary = serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        groups.entry((run.mode, run.cell.clone())).or_default().push(run);
    }
    let rows: Vec<ReportRow> = groups
        .iter()
        .map(|((mode, cell), runs)| {
            let (memory_mean, memory_std) = mean_std(&runs.iter().map(|r| r.memory_count as f64).collect::<Vec<_>>());
            let (accuracy_mean, accuracy_std) = mean_std(&runs.iter().map(|r| r.test_accuracy).collect::<Vec<_>>());
            ReportRow { mode: *mode, cell: cell.clone(), n_runs: runs.len(), memory_mean, memory_std, accuracy_mean, accuracy_std }
        })
        .collect();

    let profile: Vec<&ReportRow> = rows.iter().filter(|r| r.mode == RewireMode::Profile).collect();
    let baseline: Vec<&ReportRow> = rows.iter().filter(|r| r.mode != RewireMode::Profile).collect();
    let comparisons = profile
        .iter()
        .filter_map(|p| {
            let b = baseline.iter().min_by(|a, b| {
                (a.memory_mean - p.memory_mean).abs().total_cmp(&(b.memory_mean - p.memory_mean).abs())
            })?;
            Some(Comparison {
                profile_cell: p.cell.clone(),
                baseline_cell: b.cell.clone(),
                profile_memory: p.memory_mean,
                baseline_memory: b.memory_mean,
                profile_accuracy: p.accuracy_mean,
                baseline_accuracy: b.accuracy_mean,
                accuracy_gain: p.accuracy_mean - b.accuracy_mean,
            })
        })
        .collect();
    let best = |rows: &[&ReportRow]| rows.iter().map(|r| r.accuracy_mean).fold(f64::NEG_INFINITY, f64::max);
    let cheapest = |rows: &[&ReportRow], level: f64| {
        rows.iter().filter(|r| r.accuracy_mean >= level).map(|r| r.memory_mean).fold(f64::INFINITY, f64::min)
    };
    let iso_accuracy = (!profile.is_empty() && !baseline.is_empty()).then(|| {
        let level = best(&profile).min(best(&baseline));
        let (pm, bm) = (cheapest(&profile, level), cheapest(&baseline, level));
        IsoAccuracy { accuracy: level, profile_memory: pm, baseline_memory: bm, ratio: bm / pm }
    });
    let report = Report { rows, comparisons, iso_accuracy };
    if let Some(dir) = out {
        create_dir(dir)?;
        let path = dir.join("report.csv");
        let err = |e| crate::router::csv_error(&path, e);
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        for r in &report.rows {
            w.serialize(r).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        write_json(&dir.join("report.json"), &report)?;
    }
    Ok(report)
}
