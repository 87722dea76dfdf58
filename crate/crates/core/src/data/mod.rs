//! Event-based spike datasets, binning into dense rasters, a synthetic
//! classification task and the Spiking Heidelberg Digits loader.

mod synthetic;
#[cfg(feature = "shd")]
mod shd;

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::container::{Array, ArrayData, Container};
use crate::error::{Error, Result};
use crate::snn::{Dataset, SpikeRaster};

pub use synthetic::{synthetic_task, SyntheticConfig};
#[cfg(feature = "shd")]
pub use shd::{load_shd, write_shd, SHD_CHANNELS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// Spike events of one sample: parallel arrays of times (seconds) and
/// channel indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventSample {
    pub times: Vec<f32>,
    pub units: Vec<u32>,
}

impl EventSample {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpikeDataset {
    pub samples: Vec<EventSample>,
    pub labels: Vec<usize>,
    pub n_channels: usize,
    pub n_classes: usize,
    pub split: Split,
}

impl SpikeDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.len() != self.labels.len() {
            return Err(Error::Domain(format!(
                "{} samples but {} labels",
                self.samples.len(),
                self.labels.len()
            )));
        }
        for (i, (s, &y)) in self.samples.iter().zip(&self.labels).enumerate() {
            if y >= self.n_classes {
                return Err(Error::Domain(format!("sample {i}: label {y} >= {} classes", self.n_classes)));
            }
            if s.times.len() != s.units.len() {
                return Err(Error::Domain(format!("sample {i}: times and units differ in length")));
            }
            if let Some(&u) = s.units.iter().find(|&&u| u as usize >= self.n_channels) {
                return Err(Error::Domain(format!("sample {i}: channel {u} >= {}", self.n_channels)));
            }
            if s.times.iter().any(|t| !(*t >= 0.0)) {
                return Err(Error::Domain(format!("sample {i}: negative or NaN spike time")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinOptions {
    pub n_steps: usize,
    /// Seconds covered by the `n_steps` bins.
    pub duration: f64,
    /// Clip bin counts to 1.
    pub clip: bool,
    /// Average groups of this many adjacent channels (1 keeps all).
    pub pool: usize,
}

impl Default for BinOptions {
    fn default() -> Self {
        BinOptions { n_steps: 100, duration: 1.0, clip: true, pool: 1 }
    }
}

/// Dense `[n_steps, n_channels]` rasters, row-major per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct BinnedDataset {
    pub n_steps: usize,
    pub n_channels: usize,
    pub n_classes: usize,
    pub samples: Vec<Vec<f32>>,
    pub labels: Vec<usize>,
}

impl BinnedDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_dataset(&self) -> Dataset {
        Dataset {
            inputs: self.samples.iter().map(|s| SpikeRaster::from_dense(self.n_steps, self.n_channels, s)).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Binned cache in the flat container format.
    pub fn write(&self, base: &Path, options: &BinOptions) -> Result<()> {
        let mut c = Container::new(json!({
            "n_steps": self.n_steps,
            "n_channels": self.n_channels,
            "n_classes": self.n_classes,
            "binning": options,
        }));
        let flat: Vec<f32> = self.samples.iter().flatten().copied().collect();
        c.insert("inputs", Array::new(vec![self.len(), self.n_steps, self.n_channels], ArrayData::F32(flat))?);
        let labels = self.labels.iter().map(|&y| y as u32).collect();
        c.insert("labels", Array::new(vec![self.len()], ArrayData::U32(labels))?);
        c.write(base)
    }

    pub fn read(base: &Path) -> Result<Self> {
        let c = Container::read(base)?;
        let field = |k: &str| {
            c.meta[k].as_u64().map(|v| v as usize).ok_or_else(|| Error::format(base, format!("missing `{k}`")))
        };
        let (n_steps, n_channels, n_classes) = (field("n_steps")?, field("n_channels")?, field("n_classes")?);
        let (ArrayData::F32(inputs), ArrayData::U32(labels)) = (&c.get("inputs")?.data, &c.get("labels")?.data) else {
            return Err(Error::format(base, "unexpected array types"));
        };
        let size = n_steps * n_channels;
        if inputs.len() != labels.len() * size {
            return Err(Error::format(base, "inputs do not match the label count"));
        }
        Ok(BinnedDataset {
            n_steps,
            n_channels,
            n_classes,
            samples: if size == 0 { vec![Vec::new(); labels.len()] } else { inputs.chunks(size).map(|c| c.to_vec()).collect() },
            labels: labels.iter().map(|&y| y as usize).collect(),
        })
    }
}

/// Event at time `t` lands in bin `floor(t / duration · n_steps)`, clamped
/// to the last bin.
pub fn bin_index(t: f64, duration: f64, n_steps: usize) -> usize {
    ((t / duration * n_steps as f64).floor().max(0.0) as usize).min(n_steps - 1)
}

pub fn bin_spikes(dataset: &SpikeDataset, options: &BinOptions) -> Result<BinnedDataset> {
    let BinOptions { n_steps, duration, clip, pool } = *options;
    if n_steps == 0 || !(duration > 0.0) || pool == 0 {
        return Err(Error::Config(format!("bad binning options {options:?}")));
    }
    let c = dataset.n_channels;
    let pooled = c.div_ceil(pool);
    let samples = dataset
        .samples
        .iter()
        .map(|s| {
            let mut counts = vec![0.0f32; n_steps * c];
            for (&t, &u) in s.times.iter().zip(&s.units) {
                counts[bin_index(t as f64, duration, n_steps) * c + u as usize] += 1.0;
            }
            if clip {
                counts.iter_mut().for_each(|v| *v = v.min(1.0));
            }
            if pool == 1 {
                return counts;
            }
            let mut out = vec![0.0f32; n_steps * pooled];
            for t in 0..n_steps {
                for g in 0..pooled {
                    let group = &counts[t * c + g * pool..t * c + ((g + 1) * pool).min(c)];
                    out[t * pooled + g] = group.iter().sum::<f32>() / group.len() as f32;
                }
            }
            out
        })
        .collect();
    Ok(BinnedDataset {
        n_steps,
        n_channels: pooled,
        n_classes: dataset.n_classes,
        samples,
        labels: dataset.labels.clone(),
    })
}
