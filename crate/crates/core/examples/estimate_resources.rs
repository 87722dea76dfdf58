//! Tile sizes needed by random networks drawn from a few profiles.
//!
//! cargo run --release --example estimate_resources

use mosaic::profile::{estimate_required_resources, PairBuckets, SparsityProfile};
use mosaic::topology::{build_lattice, GridConfig, Placement};

fn main() -> mosaic::Result<()> {
    let grid = GridConfig::unbounded(4, 4, 16)?;
    let lattice = build_lattice(grid)?;
    let placement = Placement::blocked(&grid);
    let buckets = PairBuckets::new(&placement, &lattice, false)?;
    let len = grid.d_max() + 1;
    let profiles = [
        ("local", vec![0.4, 0.15, 0.0, 0.02]),
        ("reference", vec![0.3, 0.1, 0.0, 0.05, 0.0, 0.02]),
        ("uniform 5%", vec![0.05; len]),
    ];
    println!("{:<12} {:>7} {:>10} {:>10} {:>10}", "profile", "conns", "NT mean", "RT mean", "RT max");
    for (name, p) in profiles {
        let target = SparsityProfile::new(p)?.fitted(len)?;
        let conns: usize = buckets.target_counts(&target)?.iter().sum();
        let est = estimate_required_resources(&target, &placement, &lattice, &buckets, 20, 0)?;
        println!(
            "{name:<12} {conns:>7} {:>10.1} {:>10.1} {:>10}  (cv {:.3} / {:.3})",
            est.nt.mean,
            est.rt.mean,
            est.rt.max,
            est.nt.cv(),
            est.rt.cv()
        );
    }
    Ok(())
}
