use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{BinOptions, SyntheticConfig};
use crate::error::{Error, Result};
use crate::profile::SparsityProfile;
use crate::rewire::{InitScales, RewireMode};
use crate::snn::{LifParams, OptimizerConfig, TrainConfig};
use crate::topology::{GridConfig, InputPlacement};

/// One experiment, read from a TOML file. Every section except `[grid]`
/// has defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub profile: ProfileSection,
    #[serde(default)]
    pub rewire: RewireSection,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default)]
    pub snn: LifParams,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub input: InputSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    /// `[p_0, p_1, ...]`; missing trailing entries are zero.
    pub target: Vec<f64>,
    pub allow_self: bool,
    /// Masks drawn per resource estimate.
    pub n_samples: usize,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection { target: vec![0.1, 0.1], allow_self: false, n_samples: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewireSection {
    pub mode: RewireMode,
    /// Global and baseline modes: fraction of `N²` kept active. Defaults to
    /// the connection count of the target profile.
    pub density: Option<f64>,
    /// Global and baseline modes: pick the connection count whose initial
    /// memory-element count matches that of the profile-mode network.
    pub match_memory: bool,
    /// Defaults to `1e-3 ×` the recurrent init scale.
    pub prune_threshold: Option<f64>,
    pub lambda_l1: f64,
}

impl Default for RewireSection {
    fn default() -> Self {
        RewireSection { mode: RewireMode::Profile, density: None, match_memory: false, prune_threshold: None, lambda_l1: 1e-5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitSection {
    pub input: f64,
    pub recurrent: f64,
    pub readout: f64,
}

impl Default for InitSection {
    fn default() -> Self {
        InitSection { input: 3.0, recurrent: 1.0, readout: 0.05 }
    }
}

impl From<InitSection> for InitScales {
    fn from(s: InitSection) -> Self {
        InitScales { input: s.input, recurrent: s.recurrent, readout: s.readout }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub map_every: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection { epochs: t.epochs, batch_size: t.batch_size, map_every: t.map_every }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    #[default]
    Synthetic,
    Shd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub source: DataSource,
    /// SHD directory (holding `shd_train.h5`, `shd_test.h5`).
    pub path: Option<PathBuf>,
    /// Directory for binned caches; reused when present.
    pub cache: Option<PathBuf>,
    /// Seed of the synthetic generator.
    pub seed: u64,
    /// Keep at most this many samples per split (SHD desk runs).
    pub max_train: Option<usize>,
    pub max_test: Option<usize>,
    pub binning: BinOptions,
    pub synthetic: SyntheticConfig,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            source: DataSource::Synthetic,
            path: None,
            cache: None,
            seed: 0,
            max_train: None,
            max_test: None,
            binning: BinOptions::default(),
            synthetic: SyntheticConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub placement: InputPlacement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    /// Parallel jobs; 0 uses every core.
    pub workers: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection { name: "run".into(), seeds: vec![0], out: PathBuf::from("runs"), workers: 0 }
    }
}

/// Grid of `(p_1, p_3)` targets; other entries come from `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub p1: Vec<f64>,
    pub p3: Vec<f64>,
    /// Entries for the other hop distances (p_1 and p_3 are overwritten).
    pub base: Vec<f64>,
    pub seeds_per_cell: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { p1: vec![0.1], p3: vec![0.01], base: Vec::new(), seeds_per_cell: 5 }
    }
}

impl SweepSection {
    pub fn cells(&self, len: usize) -> Result<Vec<SparsityProfile>> {
        let mut cells = Vec::new();
        for &p1 in &self.p1 {
            for &p3 in &self.p3 {
                let mut p = self.base.clone();
                p.resize(p.len().max(len).max(4), 0.0);
                p[1] = p1;
                p[3] = p3;
                cells.push(SparsityProfile::new(p)?.fitted(len)?);
            }
        }
        Ok(cells)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.snn.validate()?;
        self.optimizer.validate()?;
        SparsityProfile::new(self.profile.target.clone())?;
        if self.experiment.seeds.is_empty() {
            return Err(Error::Config("experiment.seeds must not be empty".into()));
        }
        if self.profile.n_samples == 0 {
            return Err(Error::Config("profile.n_samples must be >= 1".into()));
        }
        if self.train.batch_size == 0 {
            return Err(Error::Config("train.batch_size must be >= 1".into()));
        }
        if self.data.source == DataSource::Synthetic {
            self.data.synthetic.validate()?;
        }
        Ok(())
    }

    /// Target profile padded to the grid's `d_max + 1` entries.
    pub fn target(&self) -> Result<SparsityProfile> {
        SparsityProfile::new(self.profile.target.clone())?.fitted(self.grid.d_max() + 1)
    }

    /// Input channels after pooling.
    pub fn input_channels(&self) -> usize {
        let raw = match self.data.source {
            DataSource::Synthetic => self.data.synthetic.n_channels,
            #[cfg(feature = "shd")]
            DataSource::Shd => crate::data::SHD_CHANNELS,
            #[cfg(not(feature = "shd"))]
            DataSource::Shd => 700,
        };
        raw.div_ceil(self.data.binning.pool.max(1))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            optimizer: self.optimizer.clone(),
            map_every: self.train.map_every,
        }
    }

    pub fn prune_threshold(&self) -> f64 {
        self.rewire.prune_threshold.unwrap_or(1e-3 * self.init.recurrent)
    }
}

/// Parses `N`, `N..M` (exclusive) or `N..=M` (inclusive).
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("bad seed range `{spec}` (expected N, N..M or N..=M)"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    if let Some((a, b)) = spec.split_once("..=") {
        let (a, b) = (num(a)?, num(b)?);
        return if a <= b { Ok((a..=b).collect()) } else { Err(bad()) };
    }
    if let Some((a, b)) = spec.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        return if a < b { Ok((a..b).collect()) } else { Err(bad()) };
    }
    Ok(vec![num(spec)?])
}
