//! Hop-distance sparsity profiles.
//!
//! `p_d` is the fraction of eligible neuron pairs at hop distance `d` that
//! are connected. Drawing random masks with a fixed profile and mapping them
//! gives the tile sizes a profile needs, a cheap stand-in for running the
//! full mapper inside the training loop.

use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::router::compute_occupancy;
use crate::seed::{derive_seed, rng_for};
use crate::topology::{hop_distance, Placement, TileKind, TileLattice};

/// Connection density per hop distance, `p[d]` for `d = 0..=d_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SparsityProfile(Vec<f64>);

impl TryFrom<Vec<f64>> for SparsityProfile {
    type Error = Error;

    fn try_from(p: Vec<f64>) -> Result<Self> {
        Self::new(p)
    }
}

impl From<SparsityProfile> for Vec<f64> {
    fn from(p: SparsityProfile) -> Vec<f64> {
        p.0
    }
}

impl SparsityProfile {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if let Some((d, v)) = p.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("p_{d} = {v} is not a fraction in [0, 1]")));
        }
        Ok(SparsityProfile(p))
    }

    pub fn zeros(len: usize) -> Self {
        SparsityProfile(vec![0.0; len])
    }

    /// A profile of length `len` with the listed `(d, p_d)` entries set.
    pub fn with_entries(len: usize, entries: &[(usize, f64)]) -> Result<Self> {
        let mut p = vec![0.0; len];
        for &(d, v) in entries {
            if d >= len {
                return Err(Error::Domain(format!("hop distance {d} beyond d_max {}", len - 1)));
            }
            p[d] = v;
        }
        Self::new(p)
    }

    /// Pads with zeros (or checks that dropped entries are zero) to `len`.
    pub fn fitted(&self, len: usize) -> Result<Self> {
        if self.0.len() > len && self.0[len..].iter().any(|&v| v != 0.0) {
            return Err(Error::Domain(format!(
                "profile has non-zero entries beyond d_max = {}",
                len.saturating_sub(1)
            )));
        }
        let mut p = self.0.clone();
        p.resize(len, 0.0);
        Ok(SparsityProfile(p))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, d: usize) -> f64 {
        self.0.get(d).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("f64 vector serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Vec<f64> = serde_json::from_str(text)
            .map_err(|e| Error::Domain(format!("profile JSON: {e}")))?;
        Self::new(p)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let p: Vec<f64> = serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        Self::new(p)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Eligible neuron pairs grouped by hop distance for one placement.
#[derive(Clone, Debug)]
pub struct PairBuckets {
    n_neurons: usize,
    allow_self: bool,
    /// Bucket of each `(pre, post)` pair, row-major; `NONE` if ineligible.
    bucket_of: Vec<u32>,
    buckets: Vec<Vec<(u32, u32)>>,
}

const NONE: u32 = u32::MAX;

impl PairBuckets {
    /// Pairs between unroutable tiles are ineligible; self-connections are
    /// eligible in bucket 0 only when `allow_self` is set.
    pub fn new(placement: &Placement, lattice: &TileLattice, allow_self: bool) -> Result<Self> {
        let config = lattice.config();
        let n = placement.n_neurons();
        let n_buckets = config.d_max() + 1;
        let tiles = config.n_tiles();
        // Hop distance per ordered tile pair.
        let mut hops = vec![None; tiles * tiles];
        for a in config.nt_indices() {
            for b in config.nt_indices() {
                hops[a.linear(config) * tiles + b.linear(config)] = hop_distance(a, b, config).ok();
            }
        }
        let mut bucket_of = vec![NONE; n * n];
        let mut buckets = vec![Vec::new(); n_buckets];
        for pre in 0..n {
            let ta = placement.tile_of(pre).linear(config);
            for post in 0..n {
                if pre == post && !allow_self {
                    continue;
                }
                let tb = placement.tile_of(post).linear(config);
                if let Some(d) = hops[ta * tiles + tb] {
                    bucket_of[pre * n + post] = d as u32;
                    buckets[d].push((pre as u32, post as u32));
                }
            }
        }
        Ok(PairBuckets { n_neurons: n, allow_self, bucket_of, buckets })
    }

    pub fn n_neurons(&self) -> usize {
        self.n_neurons
    }

    pub fn allows_self(&self) -> bool {
        self.allow_self
    }

    /// `d_max + 1`.
    pub fn n_buckets(&self) -> usize {
        self.buckets.len()
    }

    /// Eligible pairs at hop distance `d`, in row-major order.
    pub fn eligible(&self, d: usize) -> &[(u32, u32)] {
        &self.buckets[d]
    }

    pub(crate) fn groups(&self) -> &[Vec<(u32, u32)>] {
        &self.buckets
    }

    pub fn bucket_len(&self, d: usize) -> usize {
        self.buckets[d].len()
    }

    #[inline]
    pub fn bucket_of(&self, pre: usize, post: usize) -> Option<usize> {
        let b = self.bucket_of[pre * self.n_neurons + post];
        (b != NONE).then_some(b as usize)
    }

    /// Active pairs per bucket. Fails on pairs outside every bucket.
    pub fn counts(&self, mask: &Mask) -> Result<Vec<usize>> {
        if mask.rows() != self.n_neurons || mask.cols() != self.n_neurons {
            return Err(Error::Domain("mask does not match the placement".into()));
        }
        let mut counts = vec![0; self.n_buckets()];
        for (pre, post) in mask.iter() {
            match self.bucket_of(pre, post) {
                Some(d) => counts[d] += 1,
                None => {
                    return Err(Error::Domain(format!("connection ({pre}, {post}) is not eligible")));
                }
            }
        }
        Ok(counts)
    }

    /// Integer budget per bucket, `n_d = round_half_even(p_d · |bucket_d|)`.
    pub fn target_counts(&self, target: &SparsityProfile) -> Result<Vec<usize>> {
        let target = target.fitted(self.n_buckets())?;
        (0..self.n_buckets())
            .map(|d| {
                let n_d = (target.get(d) * self.bucket_len(d) as f64).round_ties_even();
                if !(0.0..=self.bucket_len(d) as f64).contains(&n_d) {
                    return Err(Error::Domain(format!(
                        "p_{d} = {} asks for {n_d} of {} pairs",
                        target.get(d),
                        self.bucket_len(d)
                    )));
                }
                Ok(n_d as usize)
            })
            .collect()
    }
}

pub fn measure_profile(mask: &Mask, buckets: &PairBuckets) -> Result<SparsityProfile> {
    let counts = buckets.counts(mask)?;
    Ok(SparsityProfile(
        counts
            .iter()
            .enumerate()
            .map(|(d, &k)| match buckets.bucket_len(d) {
                0 => 0.0,
                len => k as f64 / len as f64,
            })
            .collect(),
    ))
}

/// Uniform `k`-subset of `0..len` via a partial Fisher–Yates shuffle. The
/// draws for a larger `k` extend those for a smaller one, so masks sampled
/// with the same seed are nested as densities grow.
pub(crate) fn choose_indices<R: Rng>(rng: &mut R, len: usize, k: usize) -> Vec<usize> {
    debug_assert!(k <= len);
    let mut idx: Vec<usize> = (0..len).collect();
    for i in 0..k {
        let j = rng.random_range(i..len);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

/// Uniformly random mask with exactly `n_d` active pairs in each bucket.
pub fn sample_mask_with_profile(target: &SparsityProfile, buckets: &PairBuckets, seed: u64) -> Result<Mask> {
    let counts = buckets.target_counts(target)?;
    Ok(sample_groups(buckets.n_neurons(), &buckets.buckets, &counts, seed))
}

/// `counts[g]` pairs drawn without replacement from each group `g`, group
/// `g` using its own stream of `seed`.
pub(crate) fn sample_groups(n: usize, groups: &[Vec<(u32, u32)>], counts: &[usize], seed: u64) -> Mask {
    let mut mask = Mask::square(n);
    for (g, (pairs, &k)) in groups.iter().zip(counts).enumerate() {
        let mut rng = rng_for(seed, g as u64);
        for i in choose_indices(&mut rng, pairs.len(), k) {
            let (pre, post) = pairs[i];
            mask.insert(pre as usize, post as usize);
        }
    }
    mask
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KindStats {
    pub mean: f64,
    pub std: f64,
    pub max: usize,
}

impl KindStats {
    /// Population statistics of per-sample requirements.
    pub fn from_samples(values: &[usize]) -> Self {
        if values.is_empty() {
            return KindStats::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
        let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
        KindStats { mean, std: var.sqrt(), max: values.iter().copied().max().unwrap_or(0) }
    }

    /// Coefficient of variation; 0 when every sample needs nothing.
    pub fn cv(&self) -> f64 {
        if self.mean == 0.0 {
            0.0
        } else {
            self.std / self.mean
        }
    }
}

/// Largest requirement per tile kind in one sampled network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRequirement {
    pub nt: usize,
    pub rt0: usize,
    pub rt1: usize,
}

impl SampleRequirement {
    pub fn rt(&self) -> usize {
        self.rt0.max(self.rt1)
    }
}

/// Minimum tile sizes that make random networks with a given profile
/// mappable, over `n_samples` draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub nt: KindStats,
    pub rt0: KindStats,
    pub rt1: KindStats,
    /// Either router kind (the router crossbar size needed).
    pub rt: KindStats,
    pub n_samples: usize,
    pub samples: Vec<SampleRequirement>,
}

impl ResourceEstimate {
    pub fn by_kind(&self) -> [(&'static str, KindStats); 4] {
        [("NT", self.nt), ("RT0", self.rt0), ("RT1", self.rt1), ("RT", self.rt)]
    }

    /// CSV rows `tile_kind,mean,std,max,n_samples` followed by the profile
    /// entries `p_0..p_dmax`.
    pub fn write_csv(&self, path: &Path, profile: &SparsityProfile) -> Result<()> {
        let err = |e| crate::router::csv_error(path, e);
        let mut w = csv::Writer::from_path(path).map_err(err)?;
        let mut header: Vec<String> =
            ["tile_kind", "mean", "std", "max", "n_samples"].iter().map(|s| s.to_string()).collect();
        header.extend((0..profile.len()).map(|d| format!("p_{d}")));
        w.write_record(&header).map_err(err)?;
        for (kind, stats) in self.by_kind() {
            let mut row = vec![
                kind.to_string(),
                stats.mean.to_string(),
                stats.std.to_string(),
                stats.max.to_string(),
                self.n_samples.to_string(),
            ];
            row.extend(profile.as_slice().iter().map(|p| p.to_string()));
            w.write_record(&row).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Monte-Carlo estimate of the tile sizes required by `target`. Sample `i`
/// uses its own derived seed, so the result does not depend on scheduling.
pub fn estimate_required_resources(
    target: &SparsityProfile,
    placement: &Placement,
    lattice: &TileLattice,
    buckets: &PairBuckets,
    n_samples: usize,
    seed: u64,
) -> Result<ResourceEstimate> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be >= 1".into()));
    }
    buckets.target_counts(target)?;
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mask = sample_mask_with_profile(target, buckets, derive_seed(seed, i as u64))?;
            let occ = compute_occupancy(&mask, placement, lattice)?;
            Ok(SampleRequirement {
                nt: occ.peak_nt_fanin(),
                rt0: occ.peak_load(TileKind::Rt0),
                rt1: occ.peak_load(TileKind::Rt1),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let column = |f: fn(&SampleRequirement) -> usize| samples.iter().map(f).collect::<Vec<_>>();
    Ok(ResourceEstimate {
        nt: KindStats::from_samples(&column(|s| s.nt)),
        rt0: KindStats::from_samples(&column(|s| s.rt0)),
        rt1: KindStats::from_samples(&column(|s| s.rt1)),
        rt: KindStats::from_samples(&column(|s| s.rt())),
        n_samples,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::GridConfig;

    fn setup(rows: usize, cols: usize, npt: usize, allow_self: bool) -> (Placement, TileLattice, PairBuckets) {
        let config = GridConfig::unbounded(rows, cols, npt).unwrap();
        let lattice = TileLattice::new(config).unwrap();
        let placement = Placement::blocked(&config);
        let buckets = PairBuckets::new(&placement, &lattice, allow_self).unwrap();
        (placement, lattice, buckets)
    }

    #[test]
    fn profile_validation() {
        assert!(SparsityProfile::new(vec![0.0, 1.0, 0.5]).is_ok());
        assert!(SparsityProfile::new(vec![1.5]).is_err());
        assert!(SparsityProfile::new(vec![-0.1]).is_err());
        assert!(SparsityProfile::new(vec![f64::NAN]).is_err());
        assert!(SparsityProfile::new(vec![0.0, 0.0, 0.3]).unwrap().fitted(2).is_err());
        assert_eq!(SparsityProfile::new(vec![0.2]).unwrap().fitted(3).unwrap().as_slice(), &[0.2, 0.0, 0.0]);
        let p = SparsityProfile::from_json("[0.5, 0.1, 0, 0.01]").unwrap();
        assert_eq!(SparsityProfile::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn bucket_lengths_match_topology_when_self_allowed() {
        let (_, lattice, buckets) = setup(3, 3, 2, true);
        for d in 0..buckets.n_buckets() {
            assert_eq!(buckets.bucket_len(d), crate::topology::bucket_size(d, lattice.config()));
        }
        let (_, _, no_self) = setup(3, 3, 2, false);
        assert_eq!(no_self.bucket_len(0), buckets.bucket_len(0) - 18);
    }

    #[test]
    fn measure_examples() {
        let (_, _, buckets) = setup(2, 2, 3, true);
        let empty = measure_profile(&Mask::square(12), &buckets).unwrap();
        assert!(empty.as_slice().iter().all(|&p| p == 0.0));

        let (_, _, single) = setup(1, 1, 4, true);
        let all = Mask::from_pairs(4, (0..4).flat_map(|i| (0..4).map(move |j| (i, j)))).unwrap();
        assert_eq!(measure_profile(&all, &single).unwrap().as_slice(), &[1.0]);

        let (_, _, no_self) = setup(1, 1, 4, false);
        assert!(measure_profile(&all, &no_self).is_err());
    }

    #[test]
    fn sample_examples() {
        let (_, _, buckets) = setup(3, 3, 2, true);
        let zero = SparsityProfile::zeros(buckets.n_buckets());
        assert!(sample_mask_with_profile(&zero, &buckets, 1).unwrap().is_empty());

        let local = SparsityProfile::with_entries(buckets.n_buckets(), &[(0, 1.0)]).unwrap();
        let mask = sample_mask_with_profile(&local, &buckets, 1).unwrap();
        assert_eq!(mask.count(), 9 * 4);
        for (pre, post) in mask.iter() {
            assert_eq!(pre / 2, post / 2, "only within-tile pairs");
        }
    }

    #[test]
    fn target_counts_round_half_even() {
        let (_, _, buckets) = setup(2, 1, 1, true);
        // Bucket 1 has two ordered pairs: 0.25 * 2 = 0.5 -> 0, 0.75 * 2 = 1.5 -> 2.
        let p = SparsityProfile::new(vec![0.0, 0.25]).unwrap();
        assert_eq!(buckets.target_counts(&p).unwrap(), vec![0, 0]);
        let p = SparsityProfile::new(vec![0.0, 0.75]).unwrap();
        assert_eq!(buckets.target_counts(&p).unwrap(), vec![0, 2]);
    }

    #[test]
    fn sampling_is_seeded_and_nested() {
        let (_, _, buckets) = setup(3, 3, 4, false);
        let low = SparsityProfile::with_entries(buckets.n_buckets(), &[(1, 0.1), (3, 0.05)]).unwrap();
        let high = SparsityProfile::with_entries(buckets.n_buckets(), &[(1, 0.3), (3, 0.05)]).unwrap();
        let a = sample_mask_with_profile(&low, &buckets, 9).unwrap();
        assert_eq!(a, sample_mask_with_profile(&low, &buckets, 9).unwrap());
        assert_ne!(a, sample_mask_with_profile(&low, &buckets, 10).unwrap());
        assert!(a.is_subset_of(&sample_mask_with_profile(&high, &buckets, 9).unwrap()));
    }

    #[test]
    fn estimate_trivial_cases() {
        let (placement, lattice, buckets) = setup(3, 3, 4, false);
        let zero = SparsityProfile::zeros(buckets.n_buckets());
        let est = estimate_required_resources(&zero, &placement, &lattice, &buckets, 5, 0).unwrap();
        assert_eq!(est.nt.mean, 4.0);
        assert_eq!(est.nt.std, 0.0);
        assert_eq!(est.rt.max, 0);

        let p = SparsityProfile::with_entries(buckets.n_buckets(), &[(1, 0.2)]).unwrap();
        let one = estimate_required_resources(&p, &placement, &lattice, &buckets, 1, 3).unwrap();
        assert_eq!(one.rt0.std, 0.0);
        assert!(one.rt0.max as f64 >= one.rt0.mean);
        assert!(estimate_required_resources(&p, &placement, &lattice, &buckets, 0, 3).is_err());
        let bad = SparsityProfile(vec![0.0, 1.2]);
        assert!(estimate_required_resources(&bad, &placement, &lattice, &buckets, 2, 3).is_err());
    }
}
