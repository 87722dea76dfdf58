//! Routes one axon to several neuron tiles and prints the shared tree.
//!
//! cargo run --example route_multicast

use std::collections::BTreeSet;

use mosaic::router::{route_axon, Upstream};
use mosaic::topology::{build_lattice, hop_distance, GridConfig, NeuronId, NtIndex};

fn main() -> mosaic::Result<()> {
    let grid = GridConfig::unbounded(4, 4, 16)?;
    let lattice = build_lattice(grid)?;
    let source = NeuronId { tile: NtIndex::new(1, 0), local_index: 3 };
    let dests: BTreeSet<NtIndex> =
        [NtIndex::new(1, 0), NtIndex::new(1, 3), NtIndex::new(3, 2), NtIndex::new(0, 2)].into_iter().collect();

    let tree = route_axon(source, &dests, &lattice)?;
    println!("axon of {:?} -> {} destinations, {} router tiles", source, dests.len(), tree.len());
    for node in tree.nodes() {
        let from = match node.upstream {
            Upstream::Source => "source".to_string(),
            Upstream::Tile(t) => t.to_string(),
        };
        let delivers: Vec<String> = node.delivers.iter().map(|d| d.to_string()).collect();
        println!("  {:<12} from {:<12} delivers [{}]", node.tile.to_string(), from, delivers.join(", "));
    }
    for &d in &dests {
        let path: Vec<String> = tree.path_to(d).unwrap_or_default().iter().map(|t| t.to_string()).collect();
        println!("  {d}: hop distance {}, path {}", hop_distance(source.tile, d, &grid)?, path.join(" > "));
    }
    Ok(())
}
