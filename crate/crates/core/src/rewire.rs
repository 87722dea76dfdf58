//! Prune-and-regrow rewiring of the recurrent weights on a fixed budget.
//!
//! Every epoch, active connections whose magnitude fell below the threshold
//! are removed and the same number is regrown uniformly at random among the
//! inactive pairs of the same group. In profile mode a group is a hop
//! distance bucket, so the hop-distance profile never changes; in global
//! mode one group holds every eligible pair and only the total is kept.
//! The L1 baseline trains a fixed random mask and never rewires.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::profile::{choose_indices, sample_groups, PairBuckets, SparsityProfile};
use crate::seed::{derive_seed, rng_for};
use crate::snn::NetworkParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewireMode {
    /// One budget per hop distance.
    #[default]
    Profile,
    /// One budget for the whole recurrent matrix.
    Global,
    /// Global random mask, trained with the L1 penalty only.
    L1Baseline,
}

impl RewireMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RewireMode::Profile => "profile",
            RewireMode::Global => "global",
            RewireMode::L1Baseline => "l1-baseline",
        }
    }
}

impl std::str::FromStr for RewireMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "profile" => Ok(RewireMode::Profile),
            "global" => Ok(RewireMode::Global),
            "l1-baseline" => Ok(RewireMode::L1Baseline),
            _ => Err(Error::Config(format!("unknown mode `{s}` (profile, global, l1-baseline)"))),
        }
    }
}

/// Standard deviations of the Gaussian weight initialisers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitScales {
    pub input: f64,
    pub recurrent: f64,
    pub readout: f64,
}

/// Budget bookkeeping. The active set itself is `NetworkParams::rec_mask`.
#[derive(Clone, Debug)]
pub struct RewireState {
    mode: RewireMode,
    n_neurons: usize,
    pub prune_threshold: f64,
    pub lambda_l1: f64,
    groups: Vec<Vec<(u32, u32)>>,
    group_of: Vec<u32>,
    targets: Vec<usize>,
}

const NONE: u32 = u32::MAX;

impl RewireState {
    /// Profile mode: bucket `d` keeps `round(p_d · |bucket_d|)` connections.
    pub fn profile(buckets: &PairBuckets, target: &SparsityProfile, prune_threshold: f64, lambda_l1: f64) -> Result<Self> {
        let targets = buckets.target_counts(target)?;
        Ok(Self::from_groups(
            RewireMode::Profile,
            buckets.n_neurons(),
            buckets.groups().to_vec(),
            targets,
            prune_threshold,
            lambda_l1,
        ))
    }

    /// Global or baseline mode: `round(density · N²)` connections anywhere
    /// among the eligible pairs.
    pub fn global(
        mode: RewireMode,
        buckets: &PairBuckets,
        density: f64,
        prune_threshold: f64,
        lambda_l1: f64,
    ) -> Result<Self> {
        if mode == RewireMode::Profile {
            return Err(Error::Config("profile mode needs a sparsity profile".into()));
        }
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::Domain(format!("density {density} is not a fraction in [0, 1]")));
        }
        let n = buckets.n_neurons();
        let target = (density * (n * n) as f64).round_ties_even() as usize;
        Self::global_count(mode, buckets, target, prune_threshold, lambda_l1)
    }

    /// Global or baseline mode with an explicit connection count.
    pub fn global_count(
        mode: RewireMode,
        buckets: &PairBuckets,
        target: usize,
        prune_threshold: f64,
        lambda_l1: f64,
    ) -> Result<Self> {
        if mode == RewireMode::Profile {
            return Err(Error::Config("profile mode needs a sparsity profile".into()));
        }
        let mut all: Vec<(u32, u32)> = buckets.groups().iter().flatten().copied().collect();
        all.sort_unstable();
        if target > all.len() {
            return Err(Error::Domain(format!(
                "{target} connections requested but only {} pairs are eligible",
                all.len()
            )));
        }
        Ok(Self::from_groups(mode, buckets.n_neurons(), vec![all], vec![target], prune_threshold, lambda_l1))
    }

    fn from_groups(
        mode: RewireMode,
        n_neurons: usize,
        groups: Vec<Vec<(u32, u32)>>,
        targets: Vec<usize>,
        prune_threshold: f64,
        lambda_l1: f64,
    ) -> Self {
        let mut group_of = vec![NONE; n_neurons * n_neurons];
        for (g, pairs) in groups.iter().enumerate() {
            for &(pre, post) in pairs {
                group_of[pre as usize * n_neurons + post as usize] = g as u32;
            }
        }
        RewireState { mode, n_neurons, prune_threshold, lambda_l1, groups, group_of, targets }
    }

    pub fn mode(&self) -> RewireMode {
        self.mode
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Connection budget per group.
    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn eligible(&self, group: usize) -> &[(u32, u32)] {
        &self.groups[group]
    }

    pub fn group_of(&self, pre: usize, post: usize) -> Option<usize> {
        let g = self.group_of[pre * self.n_neurons + post];
        (g != NONE).then_some(g as usize)
    }

    /// Active connections per group.
    pub fn counts(&self, mask: &Mask) -> Result<Vec<usize>> {
        let mut counts = vec![0; self.groups.len()];
        for (pre, post) in mask.iter() {
            let g = self
                .group_of(pre, post)
                .ok_or_else(|| Error::Domain(format!("connection ({pre}, {post}) is not eligible")))?;
            counts[g] += 1;
        }
        Ok(counts)
    }

    /// Checks that every group is exactly on budget and that weights vanish
    /// outside the mask.
    pub fn check_budget(&self, params: &NetworkParams) -> Result<()> {
        params.check_consistency()?;
        let counts = self.counts(&params.rec_mask)?;
        if counts != self.targets {
            return Err(Error::Domain(format!("group counts {counts:?} differ from targets {:?}", self.targets)));
        }
        Ok(())
    }
}

/// Per-group audit of one rewiring step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RewireEvent {
    pub epoch: usize,
    pub pruned: Vec<usize>,
    pub regrown: Vec<usize>,
    /// Flat `w_rec` indices that were pruned or regrown.
    #[serde(skip)]
    pub changed: Vec<usize>,
}

/// Fresh parameters with the recurrent mask on budget. The input mask fixes
/// which input weights exist; the readout is dense.
pub fn init_weights(
    state: &RewireState,
    scales: &InitScales,
    in_mask: Mask,
    n_classes: usize,
    seed: u64,
) -> Result<NetworkParams> {
    if in_mask.cols() != state.n_neurons {
        return Err(Error::Domain("input mask does not match the network size".into()));
    }
    for (g, (&k, pairs)) in state.targets.iter().zip(&state.groups).enumerate() {
        if k > pairs.len() {
            return Err(Error::Domain(format!("group {g} needs {k} connections but has {} pairs", pairs.len())));
        }
    }
    let mut params = NetworkParams::zeros(in_mask, n_classes);
    params.rec_mask = sample_groups(state.n_neurons, &state.groups, &state.targets, derive_seed(seed, 0));
    let fill = |w: &mut [f64], mask: Option<&Mask>, std: f64, stream: u64| -> Result<()> {
        let normal = Normal::new(0.0, std).map_err(|e| Error::Config(format!("init scale {std}: {e}")))?;
        let mut rng = rng_for(seed, stream);
        for (i, w) in w.iter_mut().enumerate() {
            if mask.is_none_or(|m| m.get_flat(i)) {
                *w = normal.sample(&mut rng);
            }
        }
        Ok(())
    };
    fill(&mut params.w_rec, Some(&params.rec_mask), scales.recurrent, 1)?;
    fill(&mut params.w_in, Some(&params.in_mask), scales.input, 2)?;
    fill(&mut params.w_out, None, scales.readout, 3)?;
    Ok(params)
}

/// `λ · Σ |w|` over the active recurrent weights.
pub fn l1_loss_term(params: &NetworkParams, lambda_l1: f64) -> f64 {
    if lambda_l1 == 0.0 {
        return 0.0;
    }
    lambda_l1 * params.rec_mask.iter().map(|(i, j)| params.w_rec[i * params.n_neurons + j].abs()).sum::<f64>()
}

/// Deactivates every active connection with `|w| < prune_threshold`.
/// Returns the number pruned per group and the flat indices removed.
pub fn prune(params: &mut NetworkParams, state: &RewireState) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = params.n_neurons;
    let mut pruned = vec![0; state.n_groups()];
    let victims: Vec<(usize, usize)> = params
        .rec_mask
        .iter()
        .filter(|&(i, j)| params.w_rec[i * n + j].abs() < state.prune_threshold)
        .collect();
    let mut changed = Vec::with_capacity(victims.len());
    for (i, j) in victims {
        let g = state
            .group_of(i, j)
            .ok_or_else(|| Error::Domain(format!("connection ({i}, {j}) is not eligible")))?;
        pruned[g] += 1;
        params.rec_mask.remove(i, j);
        params.w_rec[i * n + j] = 0.0;
        changed.push(i * n + j);
    }
    Ok((pruned, changed))
}

/// Regrows each group up to its budget, choosing uniformly among its
/// inactive pairs. New weights get magnitude `prune_threshold` and a random
/// sign.
pub fn reassign(params: &mut NetworkParams, state: &RewireState, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = params.n_neurons;
    let counts = state.counts(&params.rec_mask)?;
    let mut regrown = vec![0; state.n_groups()];
    let mut changed = Vec::new();
    for (g, pairs) in state.groups.iter().enumerate() {
        let target = state.targets[g];
        if counts[g] > target {
            return Err(Error::Domain(format!("group {g} holds {} connections, over its budget {target}", counts[g])));
        }
        let need = target - counts[g];
        if need == 0 {
            continue;
        }
        let free: Vec<(u32, u32)> =
            pairs.iter().copied().filter(|&(i, j)| !params.rec_mask.get(i as usize, j as usize)).collect();
        assert!(need <= free.len(), "group {g} is exhausted");
        let mut rng = rng_for(seed, g as u64);
        for k in choose_indices(&mut rng, free.len(), need) {
            let (i, j) = (free[k].0 as usize, free[k].1 as usize);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            params.rec_mask.insert(i, j);
            params.w_rec[i * n + j] = sign * state.prune_threshold;
            changed.push(i * n + j);
        }
        regrown[g] = need;
    }
    Ok((regrown, changed))
}

/// Prune then reassign; a no-op for the L1 baseline.
pub fn rewire_epoch(params: &mut NetworkParams, state: &RewireState, epoch: usize, seed: u64) -> Result<RewireEvent> {
    let groups = state.n_groups();
    if state.mode == RewireMode::L1Baseline {
        return Ok(RewireEvent { epoch, pruned: vec![0; groups], regrown: vec![0; groups], changed: Vec::new() });
    }
    let (pruned, mut changed) = prune(params, state)?;
    let (regrown, grown) = reassign(params, state, seed)?;
    changed.extend(grown);
    Ok(RewireEvent { epoch, pruned, regrown, changed })
}

/// Writes `epoch,bucket,pruned,regrown` rows.
pub fn write_events_csv(path: &std::path::Path, events: &[RewireEvent]) -> Result<()> {
    let err = |e| crate::router::csv_error(path, e);
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["epoch", "bucket", "pruned", "regrown"]).map_err(err)?;
    for e in events {
        for (g, (p, r)) in e.pruned.iter().zip(&e.regrown).enumerate() {
            w.write_record([e.epoch.to_string(), g.to_string(), p.to_string(), r.to_string()]).map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{GridConfig, Placement, TileLattice};

    fn buckets(rows: usize, cols: usize, npt: usize) -> PairBuckets {
        let config = GridConfig::unbounded(rows, cols, npt).unwrap();
        let lattice = TileLattice::new(config.clone()).unwrap();
        PairBuckets::new(&Placement::blocked(&config), &lattice, false).unwrap()
    }

    const SCALES: InitScales = InitScales { input: 1.0, recurrent: 1.0, readout: 1.0 };

    fn params(state: &RewireState, seed: u64) -> NetworkParams {
        init_weights(state, &SCALES, Mask::new(1, state.n_neurons), 2, seed).unwrap()
    }

    #[test]
    fn zero_profile_gives_zero_matrix() {
        let b = buckets(2, 2, 3);
        let state = RewireState::profile(&b, &SparsityProfile::zeros(b.n_buckets()), 0.1, 0.0).unwrap();
        let p = params(&state, 1);
        assert!(p.rec_mask.is_empty());
        assert!(p.w_rec.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn local_profile_fills_tile_blocks() {
        let b = buckets(2, 2, 3);
        let target = SparsityProfile::with_entries(b.n_buckets(), &[(0, 1.0)]).unwrap();
        let state = RewireState::profile(&b, &target, 0.1, 0.0).unwrap();
        let p = params(&state, 1);
        assert_eq!(p.rec_mask.count(), 4 * 3 * 2);
        for (i, j) in p.rec_mask.iter() {
            assert_eq!(i / 3, j / 3);
            assert_ne!(p.w_rec[i * 12 + j], 0.0);
        }
        state.check_budget(&p).unwrap();
    }

    #[test]
    fn l1_term() {
        let b = buckets(1, 1, 2);
        let state = RewireState::global(RewireMode::Global, &b, 0.25, 0.0, 0.0).unwrap();
        let mut p = params(&state, 3);
        assert_eq!(p.rec_mask.count(), 1);
        let (i, j) = p.rec_mask.iter().next().unwrap();
        p.w_rec[i * 2 + j] = -0.7;
        assert!((l1_loss_term(&p, 0.01) - 0.007).abs() < 1e-15);
        assert_eq!(l1_loss_term(&p, 0.0), 0.0);
    }

    #[test]
    fn global_budget_on_ten_neurons() {
        let b = buckets(1, 1, 10);
        let state = RewireState::global(RewireMode::Global, &b, 0.2, 0.5, 0.0).unwrap();
        let mut p = params(&state, 5);
        assert_eq!(p.rec_mask.count(), 20);
        let event = rewire_epoch(&mut p, &state, 0, 9).unwrap();
        assert_eq!(p.rec_mask.count(), 20);
        assert_eq!(event.pruned, event.regrown);
        assert!(event.pruned[0] > 0);
        state.check_budget(&p).unwrap();
    }

    #[test]
    fn zero_threshold_is_a_no_op() {
        let b = buckets(2, 2, 4);
        let target = SparsityProfile::with_entries(b.n_buckets(), &[(0, 0.5), (1, 0.2)]).unwrap();
        let state = RewireState::profile(&b, &target, 0.0, 0.0).unwrap();
        let mut p = params(&state, 2);
        let before = p.clone();
        let event = rewire_epoch(&mut p, &state, 0, 4).unwrap();
        assert_eq!(p, before);
        assert!(event.changed.is_empty());
    }

    #[test]
    fn one_pruned_one_regrown_in_same_bucket() {
        let b = buckets(2, 2, 4);
        let target = SparsityProfile::with_entries(b.n_buckets(), &[(0, 0.5), (1, 0.2), (3, 0.1)]).unwrap();
        let state = RewireState::profile(&b, &target, 0.5, 0.0).unwrap();
        let mut p = params(&state, 2);
        for (i, j) in p.rec_mask.clone().iter() {
            p.w_rec[i * 16 + j] = 1.0;
        }
        let (i, j) = p.rec_mask.iter().find(|&(i, j)| state.group_of(i, j) == Some(1)).unwrap();
        p.w_rec[i * 16 + j] = 0.1;
        let event = rewire_epoch(&mut p, &state, 3, 8).unwrap();
        let mut expected = vec![0; state.n_groups()];
        expected[1] = 1;
        assert_eq!(event.pruned, expected);
        assert_eq!(event.regrown, expected);
        assert!(!p.rec_mask.get(i, j) || p.w_rec[i * 16 + j].abs() == 0.5);
        state.check_budget(&p).unwrap();
    }

    #[test]
    fn prune_removes_exactly_small_weights() {
        let b = buckets(2, 2, 4);
        let target = SparsityProfile::with_entries(b.n_buckets(), &[(0, 0.6), (1, 0.3), (3, 0.2)]).unwrap();
        let state = RewireState::profile(&b, &target, 0.4, 0.0).unwrap();
        let mut p = params(&state, 11);
        let dense = p.w_rec.clone();
        let mask = p.rec_mask.clone();
        prune(&mut p, &state).unwrap();
        for idx in 0..dense.len() {
            let keep = mask.get_flat(idx) && dense[idx].abs() >= 0.4;
            assert_eq!(p.rec_mask.get_flat(idx), keep);
            assert_eq!(p.w_rec[idx], if keep { dense[idx] } else { 0.0 });
        }
        assert!(p.rec_mask.is_subset_of(&mask));
    }
}
