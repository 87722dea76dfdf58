//! Desk-scale stand-in for SHD: each class is a fixed random pattern of
//! spike events, and samples are noisy copies of their class pattern.
//!
//! With `motifs > 0` the class patterns are built from a shared bank of
//! short motifs played in a class-specific order, so every class emits the
//! same events per channel and only their order tells classes apart.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{bin_index, EventSample, SpikeDataset, Split};
use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_classes: usize,
    pub n_channels: usize,
    /// Resolution at which template distances are measured.
    pub n_steps: usize,
    /// Seconds.
    pub duration: f64,
    pub train_per_class: usize,
    pub test_per_class: usize,
    /// Events per class template.
    pub template_events: usize,
    /// Standard deviation of per-event time jitter, seconds.
    pub jitter: f64,
    /// Probability of dropping each template event.
    pub dropout: f64,
    /// Uniform background events added to every sample.
    pub noise_events: usize,
    /// Minimum Hamming distance between binned class templates.
    pub min_distance: usize,
    /// Size of the shared motif bank; 0 draws free templates.
    pub motifs: usize,
    /// Motif slots per template; each motif fills an equal share of them.
    pub segments: usize,
    /// Silent fraction at the end of each slot.
    pub gap: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_classes: 10,
            n_channels: 64,
            n_steps: 50,
            duration: 1.0,
            train_per_class: 100,
            test_per_class: 20,
            template_events: 120,
            jitter: 0.02,
            dropout: 0.05,
            noise_events: 15,
            min_distance: 40,
            motifs: 4,
            segments: 4,
            gap: 0.0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::Config("synthetic task needs at least 2 classes".into()));
        }
        if self.n_channels == 0 || self.n_steps == 0 || !(self.duration > 0.0) {
            return Err(Error::Config("synthetic task needs channels, steps and a positive duration".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) || !(self.jitter >= 0.0) {
            return Err(Error::Config("dropout must be in [0, 1) and jitter non-negative".into()));
        }
        if self.motifs > 0 && (self.segments < self.motifs || self.segments % self.motifs != 0) {
            return Err(Error::Config("segments must be a positive multiple of motifs".into()));
        }
        if !(0.0..1.0).contains(&self.gap) {
            return Err(Error::Config("gap must be in [0, 1)".into()));
        }
        Ok(())
    }

    fn raster(&self, s: &EventSample) -> Vec<bool> {
        let mut bits = vec![false; self.n_steps * self.n_channels];
        for (&t, &u) in s.times.iter().zip(&s.units) {
            bits[bin_index(t as f64, self.duration, self.n_steps) * self.n_channels + u as usize] = true;
        }
        bits
    }
}

const MAX_ATTEMPTS: usize = 1000;

fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Class templates, redrawn until every pair is at least `min_distance`
/// apart.
pub(crate) fn templates(config: &SyntheticConfig, seed: u64) -> Result<Vec<EventSample>> {
    let mut rng = rng_for(seed, 0);
    let slot = config.duration / config.segments.max(1) as f64;
    let active = slot * (1.0 - config.gap);
    let per_motif = config.template_events / config.segments.max(1);
    let bank: Vec<Vec<(f64, u32)>> = (0..config.motifs)
        .map(|_| {
            (0..per_motif)
                .map(|_| (rng.random_range(0.0..active), rng.random_range(0..config.n_channels) as u32))
                .collect()
        })
        .collect();
    let mut out: Vec<EventSample> = Vec::new();
    let mut rasters: Vec<Vec<bool>> = Vec::new();
    for class in 0..config.n_classes {
        let mut attempts = 0;
        loop {
            let mut events: Vec<(f32, u32)> = if bank.is_empty() {
                (0..config.template_events)
                    .map(|_| {
                        (
                            rng.random_range(0.0..config.duration) as f32,
                            rng.random_range(0..config.n_channels) as u32,
                        )
                    })
                    .collect()
            } else {
                let mut order: Vec<usize> = (0..config.segments).map(|k| k % config.motifs).collect();
                order.shuffle(&mut rng);
                order
                    .iter()
                    .enumerate()
                    .flat_map(|(k, &m)| bank[m].iter().map(move |&(t, u)| ((k as f64 * slot + t) as f32, u)))
                    .collect()
            };
            events.sort_by(|a, b| a.0.total_cmp(&b.0));
            let t = EventSample { times: events.iter().map(|e| e.0).collect(), units: events.iter().map(|e| e.1).collect() };
            let r = config.raster(&t);
            if rasters.iter().all(|o| hamming(o, &r) >= config.min_distance) {
                out.push(t);
                rasters.push(r);
                break;
            }
            attempts += 1;
            if attempts == MAX_ATTEMPTS {
                return Err(Error::Config(format!(
                    "could not place template {class} at Hamming distance {} from the others",
                    config.min_distance
                )));
            }
        }
    }
    Ok(out)
}

fn noisy_copy<R: Rng>(rng: &mut R, template: &EventSample, config: &SyntheticConfig) -> EventSample {
    let jitter = Normal::new(0.0, config.jitter.max(f64::MIN_POSITIVE)).expect("finite jitter");
    let last = (config.duration * (1.0 - f64::EPSILON)) as f32;
    let mut events: Vec<(f32, u32)> = Vec::new();
    for (&t, &u) in template.times.iter().zip(&template.units) {
        if rng.random_bool(config.dropout) {
            continue;
        }
        let dt = if config.jitter > 0.0 { jitter.sample(rng) } else { 0.0 };
        events.push((((t as f64 + dt) as f32).clamp(0.0, last), u));
    }
    for _ in 0..config.noise_events {
        events.push((rng.random_range(0.0..config.duration) as f32, rng.random_range(0..config.n_channels) as u32));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    EventSample { times: events.iter().map(|e| e.0).collect(), units: events.iter().map(|e| e.1).collect() }
}

/// Train and test splits with balanced classes; deterministic in `seed`.
pub fn synthetic_task(config: &SyntheticConfig, seed: u64) -> Result<(SpikeDataset, SpikeDataset)> {
    config.validate()?;
    let templates = templates(config, seed)?;
    let split = |split: Split, per_class: usize, stream: u64| {
        let mut rng = rng_for(seed, stream);
        let n = per_class * config.n_classes;
        let labels: Vec<usize> = (0..n).map(|i| i % config.n_classes).collect();
        let samples = labels.iter().map(|&y| noisy_copy(&mut rng, &templates[y], config)).collect();
        SpikeDataset { samples, labels, n_channels: config.n_channels, n_classes: config.n_classes, split }
    };
    Ok((split(Split::Train, config.train_per_class, 1), split(Split::Test, config.test_per_class, 2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        let config = SyntheticConfig { train_per_class: 3, test_per_class: 2, ..SyntheticConfig::default() };
        let (a, b) = synthetic_task(&config, 4).unwrap();
        let (c, _) = synthetic_task(&config, 4).unwrap();
        assert_eq!(a, c);
        a.validate().unwrap();
        b.validate().unwrap();
        assert_eq!(a.len(), 30);
        assert_eq!(b.len(), 20);
        assert_ne!(synthetic_task(&config, 5).unwrap().0, a);
    }

    #[test]
    fn templates_are_far_apart() {
        let config = SyntheticConfig { motifs: 0, ..SyntheticConfig::default() };
        let t = templates(&config, 9).unwrap();
        for i in 0..t.len() {
            for j in 0..i {
                assert!(hamming(&config.raster(&t[i]), &config.raster(&t[j])) >= config.min_distance);
            }
        }
        let impossible = SyntheticConfig { min_distance: 10_000, ..config };
        assert!(templates(&impossible, 9).is_err());
    }

    #[test]
    fn motif_templates_share_channel_counts() {
        let config = SyntheticConfig { min_distance: 1, ..SyntheticConfig::default() };
        let t = templates(&config, 2).unwrap();
        let counts = |s: &EventSample| {
            let mut c = vec![0; config.n_channels];
            for &u in &s.units {
                c[u as usize] += 1;
            }
            c
        };
        for x in &t[1..] {
            assert_eq!(counts(x), counts(&t[0]));
            assert_ne!(config.raster(x), config.raster(&t[0]));
        }
        assert!(SyntheticConfig { segments: 6, ..config }.validate().is_err());
    }

    #[test]
    fn noiseless_samples_equal_templates() {
        let config = SyntheticConfig {
            jitter: 0.0,
            dropout: 0.0,
            noise_events: 0,
            train_per_class: 2,
            test_per_class: 1,
            ..SyntheticConfig::default()
        };
        let t = templates(&config, 1).unwrap();
        let (train, _) = synthetic_task(&config, 1).unwrap();
        for (s, &y) in train.samples.iter().zip(&train.labels) {
            assert_eq!(config.raster(s), config.raster(&t[y]));
        }
    }
}
