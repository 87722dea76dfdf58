//! Property tests for routing, occupancy, profiles, masks and binning.

mod common;

use std::collections::BTreeSet;

use common::*;
use mosaic::data::{bin_spikes, BinOptions, EventSample, SpikeDataset, Split};
use mosaic::mask::{mask_from_triplets, read_triplets, triplets_from, Mask};
use mosaic::profile::{measure_profile, sample_mask_with_profile, PairBuckets, SparsityProfile};
use mosaic::router::{check_mappable, compute_occupancy, route_axon};
use mosaic::topology::{
    bucket_size, build_lattice, hop_distance, GridConfig, InputProjection, NeuronId, NtIndex, Placement, TileKind,
};
use proptest::prelude::*;

fn grid() -> impl Strategy<Value = GridConfig> {
    (1usize..=4, 1usize..=4, 1usize..=4)
        .prop_filter("at least two tiles", |&(r, c, _)| r * c > 1)
        .prop_map(|(r, c, n)| GridConfig::unbounded(r, c, n).unwrap())
}

fn nt(g: &GridConfig) -> impl Strategy<Value = NtIndex> {
    (0..g.nt_rows, 0..g.nt_cols).prop_map(|(r, c)| NtIndex::new(r, c))
}

/// A grid, a source tile and a destination set reachable from it.
fn multicast() -> impl Strategy<Value = (GridConfig, NtIndex, BTreeSet<NtIndex>)> {
    grid()
        .prop_flat_map(|g| (Just(g), nt(&g), prop::collection::vec(nt(&g), 1..12)))
        .prop_map(|(g, s, ds)| {
            let ds: BTreeSet<NtIndex> = ds.into_iter().filter(|&d| bfs_distance(s, d, &g).is_some()).collect();
            (g, s, ds)
        })
        .prop_filter("non-empty destination set", |(_, _, ds)| !ds.is_empty())
}

fn routable_mask() -> impl Strategy<Value = (GridConfig, Mask)> {
    grid().prop_flat_map(|g| {
        let n = g.n_neurons();
        (Just(g), prop::collection::vec(any::<bool>(), n * n)).prop_map(move |(g, bits)| {
            let mut m = Mask::square(n);
            for (idx, b) in bits.into_iter().enumerate() {
                let (i, j) = (idx / n, idx % n);
                if b && bfs_distance(tile_of(i, &g), tile_of(j, &g), &g).is_some() {
                    m.insert(i, j);
                }
            }
            (g, m)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tree_paths_are_legal_and_match_the_oracle((g, s, ds) in multicast()) {
        let lattice = build_lattice(g).unwrap();
        let tree = route_axon(NeuronId { tile: s, local_index: 0 }, &ds, &lattice).unwrap();
        for &d in &ds {
            let routers: Vec<Site> = tree.path_to(d).unwrap().iter().map(|t| (t.x, t.y)).collect();
            prop_assert_eq!(routers.len(), hop_distance(s, d, &g).unwrap());
            if d != s {
                let mut full = vec![site(s)];
                full.extend(&routers);
                full.push(site(d));
                prop_assert_eq!(check_path(&full, &g), Ok(()));
            }
            prop_assert_eq!(Some(routers), oracle_path(s, d, &g));
        }
        for node in tree.nodes() {
            prop_assert!(node.tile.kind.is_router());
            for down in &node.downstream {
                prop_assert!(node.tile.is_adjacent(down));
            }
        }
    }

    #[test]
    fn adding_destinations_only_grows_the_tree((g, s, ds) in multicast(), cut in 0usize..12) {
        let lattice = build_lattice(g).unwrap();
        let src = NeuronId { tile: s, local_index: 0 };
        let sub: BTreeSet<NtIndex> = ds.iter().copied().take(cut.max(1)).collect();
        let small: BTreeSet<_> = route_axon(src, &sub, &lattice).unwrap().tiles().copied().collect();
        let big: BTreeSet<_> = route_axon(src, &ds, &lattice).unwrap().tiles().copied().collect();
        prop_assert!(small.is_subset(&big));
    }

    #[test]
    fn hop_distance_is_symmetric_and_matches_bfs(g in grid()) {
        for (s, d, bfs) in all_pairs(&g) {
            prop_assert_eq!(hop_distance(s, d, &g).ok(), bfs);
            prop_assert_eq!(hop_distance(d, s, &g).ok(), bfs);
        }
    }

    #[test]
    fn bucket_sizes_cover_every_routable_pair(g in grid()) {
        let routable = all_pairs(&g).iter().filter(|p| p.2.is_some()).count();
        let total: usize = (0..=g.d_max() + 1).map(|d| bucket_size(d, &g)).sum();
        prop_assert_eq!(total, routable * g.neurons_per_tile * g.neurons_per_tile);
        prop_assert_eq!(bucket_size(g.d_max() + 1, &g), 0);
    }

    #[test]
    fn occupancy_matches_recount_and_is_monotone((g, m) in routable_mask(), drop in any::<u64>()) {
        let lattice = build_lattice(g).unwrap();
        let p = Placement::blocked(&g);
        let occ = compute_occupancy(&m, &p, &lattice).unwrap();
        let oracle = recount(&m, &g);
        for t in lattice.tiles() {
            if t.kind == TileKind::Nt {
                let f = occ.nt_fan_in(t.nt().unwrap());
                prop_assert_eq!(f.remote, oracle.remote.get(&(t.x, t.y)).copied().unwrap_or(0));
            } else {
                prop_assert_eq!(occ.rt_load(t), oracle.rt.get(&(t.x, t.y)).copied().unwrap_or(0));
            }
        }
        // Removing synapses never increases any load.
        let mut sub = m.clone();
        for (k, (i, j)) in m.iter().enumerate() {
            if (drop >> (k % 64)) & 1 == 1 {
                sub.remove(i, j);
            }
        }
        let less = compute_occupancy(&sub, &p, &lattice).unwrap();
        for t in lattice.tiles() {
            prop_assert!(less.required(t) <= occ.required(t));
        }
    }

    #[test]
    fn mappable_iff_within_capacity((g, m) in routable_mask(), nt_cap in 1usize..40, rt_cap in 1usize..40) {
        let nt_cap = nt_cap.max(g.neurons_per_tile);
        let bounded = GridConfig::new(g.nt_rows, g.nt_cols, g.neurons_per_tile, nt_cap, rt_cap).unwrap();
        let lattice = build_lattice(bounded).unwrap();
        let p = Placement::blocked(&bounded);
        let occ = compute_occupancy(&m, &p, &lattice).unwrap();
        let report = check_mappable(&m, &p, &lattice, &InputProjection::none()).unwrap();
        let fits = lattice.tiles().iter().all(|t| {
            let cap = if t.kind == TileKind::Nt { nt_cap } else { rt_cap };
            occ.required(t) <= cap
        });
        prop_assert_eq!(report.mappable, fits);
        prop_assert_eq!(report.violations.is_empty(), fits);
        for v in &report.violations {
            prop_assert!(v.required > v.capacity);
            prop_assert_eq!(v.required, occ.required(&v.tile));
        }
    }

    #[test]
    fn sampled_masks_hit_exact_counts_and_nest(
        g in grid(),
        p in prop::collection::vec(0.0f64..=1.0, 1..12),
        shrink in 0.0f64..=1.0,
        seed in any::<u64>(),
        allow_self in any::<bool>(),
    ) {
        let lattice = build_lattice(g).unwrap();
        let buckets = PairBuckets::new(&Placement::blocked(&g), &lattice, allow_self).unwrap();
        let mut p = p;
        p.truncate(g.d_max() + 1);
        let target = SparsityProfile::new(p).unwrap().fitted(g.d_max() + 1).unwrap();
        let smaller = SparsityProfile::new(target.as_slice().iter().map(|x| x * shrink).collect()).unwrap();
        let mask = sample_mask_with_profile(&target, &buckets, seed).unwrap();
        let small = sample_mask_with_profile(&smaller, &buckets, seed).unwrap();
        prop_assert_eq!(buckets.counts(&mask).unwrap(), buckets.target_counts(&target).unwrap());
        prop_assert!(small.is_subset_of(&mask));
        if !allow_self {
            prop_assert!((0..mask.rows()).all(|i| !mask.get(i, i)));
        }
        let measured = measure_profile(&mask, &buckets).unwrap();
        for d in 0..buckets.n_buckets() {
            prop_assert!((0.0..=1.0).contains(&measured.get(d)));
        }
    }

    #[test]
    fn profile_json_round_trip(p in prop::collection::vec(0.0f64..=1.0, 0..10)) {
        let profile = SparsityProfile::new(p).unwrap();
        prop_assert_eq!(SparsityProfile::from_json(&profile.to_json()).unwrap(), profile);
    }

    #[test]
    fn triplet_text_round_trip(n in 1usize..20, bits in prop::collection::vec(any::<bool>(), 400), w in -5.0f64..5.0) {
        let mut m = Mask::square(n);
        for (idx, &b) in bits.iter().take(n * n).enumerate() {
            if b {
                m.insert(idx / n, idx % n);
            }
        }
        let weights: Vec<f64> = (0..n * n).map(|i| w * i as f64).collect();
        let triplets = triplets_from(&m, Some(&weights));
        let mut text = String::from("pre post weight\n");
        for t in &triplets {
            text.push_str(&format!("{} {} {}\n", t.pre, t.post, t.weight));
        }
        let file = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(file.path(), text).unwrap();
        let back = read_triplets(file.path()).unwrap();
        prop_assert_eq!(&back, &triplets);
        prop_assert_eq!(mask_from_triplets(n, &back).unwrap(), m);
    }

    #[test]
    fn unclipped_binning_conserves_events(
        events in prop::collection::vec((0.0f32..=1.0, 0u32..16), 0..200),
        n_steps in 1usize..60,
    ) {
        let sample = EventSample { times: events.iter().map(|e| e.0).collect(), units: events.iter().map(|e| e.1).collect() };
        let data = SpikeDataset { samples: vec![sample], labels: vec![0], n_channels: 16, n_classes: 1, split: Split::Train };
        let binned = bin_spikes(&data, &BinOptions { n_steps, duration: 1.0, clip: false, pool: 1 }).unwrap();
        let total: f32 = binned.samples[0].iter().sum();
        prop_assert_eq!(total as usize, events.len());
        let clipped = bin_spikes(&data, &BinOptions { n_steps, duration: 1.0, clip: true, pool: 1 }).unwrap();
        prop_assert!(clipped.samples[0].iter().all(|&v| v == 0.0 || v == 1.0));
    }
}
