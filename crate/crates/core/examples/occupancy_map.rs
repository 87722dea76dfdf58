//! Samples a network with a locality profile, maps it onto a 4x4 grid and
//! draws the per-tile load next to the capacities.
//!
//! cargo run --example occupancy_map

use mosaic::profile::{sample_mask_with_profile, PairBuckets, SparsityProfile};
use mosaic::router::{check_mappable, compute_occupancy};
use mosaic::topology::{build_lattice, GridConfig, InputPlacement, InputProjection, Placement, TileKind};

fn main() -> mosaic::Result<()> {
    let grid = GridConfig::new(4, 4, 16, 150, 120)?;
    let lattice = build_lattice(grid)?;
    let placement = Placement::blocked(&grid);
    let buckets = PairBuckets::new(&placement, &lattice, false)?;
    let target = SparsityProfile::new(vec![0.3, 0.1, 0.0, 0.05, 0.0, 0.02])?.fitted(grid.d_max() + 1)?;
    let mask = sample_mask_with_profile(&target, &buckets, 7)?;
    let inputs = InputProjection::new(64, InputPlacement::RoundRobin, &grid);

    let mut occ = compute_occupancy(&mask, &placement, &lattice)?;
    occ.add_inputs(&inputs);
    println!("{} connections, NT capacity {}, RT capacity {}", mask.count(), grid.nt_input_size, grid.rt_size);
    for y in 0..lattice.height() {
        let row: Vec<String> = (0..lattice.width())
            .map(|x| {
                let t = lattice.tile(x, y).expect("inside the lattice");
                let tag = match t.kind {
                    TileKind::Nt => 'N',
                    TileKind::Rt0 => 'r',
                    TileKind::Rt1 => 'R',
                };
                format!("{tag}{:>4}", occ.required(&t))
            })
            .collect();
        println!("  {}", row.join(" "));
    }
    println!("{}", check_mappable(&mask, &placement, &lattice, &inputs)?);
    Ok(())
}
