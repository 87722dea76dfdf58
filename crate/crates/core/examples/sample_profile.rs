//! Draws a mask with exact per-distance counts, measures it back and
//! round-trips it through the triplet text format.
//!
//! cargo run --example sample_profile

use mosaic::mask::{mask_from_triplets, read_triplets, triplets_from, write_triplets};
use mosaic::profile::{measure_profile, sample_mask_with_profile, PairBuckets, SparsityProfile};
use mosaic::topology::{build_lattice, GridConfig, Placement};

fn main() -> mosaic::Result<()> {
    let grid = GridConfig::unbounded(3, 3, 8)?;
    let lattice = build_lattice(grid)?;
    let placement = Placement::blocked(&grid);
    let buckets = PairBuckets::new(&placement, &lattice, false)?;
    let target = SparsityProfile::new(vec![0.5, 0.2, 0.0, 0.1, 0.0, 0.05])?.fitted(grid.d_max() + 1)?;

    let mask = sample_mask_with_profile(&target, &buckets, 1)?;
    let measured = measure_profile(&mask, &buckets)?;
    println!("{:>3} {:>9} {:>7} {:>7} {:>9}", "d", "eligible", "target", "count", "measured");
    for (d, count) in buckets.counts(&mask)?.iter().enumerate() {
        println!("{d:>3} {:>9} {:>7.3} {count:>7} {:>9.4}", buckets.bucket_len(d), target.get(d), measured.get(d));
    }

    let path = std::env::temp_dir().join("sample_profile_mask.txt");
    write_triplets(&path, &triplets_from(&mask, None))?;
    let back = mask_from_triplets(grid.n_neurons(), &read_triplets(&path)?)?;
    println!("triplet round trip identical: {}", back == mask);
    Ok(())
}
