//! One-turn shared-path multicast routing, crossbar occupancy and
//! mappability.
//!
//! Routers live on the odd lattice rows and columns. An axon leaving its
//! tile for another row enters the RT0 directly above or below it, runs along
//! that router row in x, turns once at the RT1 beside the destination column
//! and runs along that router column in y, delivering sideways from the RT0
//! next to the destination. Same-row destinations more than one tile away
//! are served straight along the router row and delivered from the RT0 above
//! or below them; directly adjacent tiles share a single RT0. All
//! destinations on one side share the longest common prefix, so the tree is
//! the union of the per-destination routes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::topology::{
    GridConfig, InputProjection, NeuronId, NtIndex, Placement, TileId, TileKind, TileLattice,
};

/// Where a tree node receives the axon from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Upstream {
    /// Injected directly by the source neuron tile.
    Source,
    Tile(TileId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RouteNode {
    pub tile: TileId,
    pub upstream: Upstream,
    pub downstream: Vec<TileId>,
    /// Neuron tiles this router hands the axon to.
    pub delivers: Vec<NtIndex>,
}

/// Multicast routing tree of one source axon. Holds router tiles only; the
/// source tile and local (same-tile) fan-out are not part of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RouteTree {
    source: NeuronId,
    destinations: BTreeSet<NtIndex>,
    nodes: BTreeMap<TileId, RouteNode>,
}

impl RouteTree {
    pub fn source(&self) -> NeuronId {
        self.source
    }

    pub fn destinations(&self) -> &BTreeSet<NtIndex> {
        &self.destinations
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn tiles(&self) -> impl Iterator<Item = &TileId> {
        self.nodes.keys()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &RouteNode> {
        self.nodes.values()
    }

    pub fn node(&self, tile: &TileId) -> Option<&RouteNode> {
        self.nodes.get(tile)
    }

    pub fn contains(&self, tile: &TileId) -> bool {
        self.nodes.contains_key(tile)
    }

    /// Router tiles from the source to `dest`, in traversal order. Empty for
    /// the source's own tile; `None` if `dest` is not served by this tree.
    pub fn path_to(&self, dest: NtIndex) -> Option<Vec<TileId>> {
        if dest == self.source.tile {
            return self.destinations.contains(&dest).then(Vec::new);
        }
        let last = self.nodes.values().find(|n| n.delivers.contains(&dest))?;
        let mut path = vec![last.tile];
        let mut up = last.upstream;
        while let Upstream::Tile(t) = up {
            path.push(t);
            up = self.nodes[&t].upstream;
        }
        path.reverse();
        Some(path)
    }
}

#[derive(Default)]
struct TreeBuilder {
    nodes: BTreeMap<TileId, RouteNode>,
}

impl TreeBuilder {
    fn push(&mut self, tile: TileId, upstream: Upstream) {
        if let Some(existing) = self.nodes.get(&tile) {
            debug_assert_eq!(existing.upstream, upstream, "route tree branch merges at {tile}");
            return;
        }
        if let Upstream::Tile(parent) = upstream {
            self.nodes.get_mut(&parent).expect("parent pushed first").downstream.push(tile);
        }
        self.nodes.insert(tile, RouteNode { tile, upstream, downstream: Vec::new(), delivers: Vec::new() });
    }

    fn deliver(&mut self, tile: TileId, dest: NtIndex) {
        let node = self.nodes.get_mut(&tile).expect("delivering tile pushed first");
        if !node.delivers.contains(&dest) {
            node.delivers.push(dest);
        }
    }
}

/// One vertical branch hanging off a router row.
#[derive(Default)]
struct Branch {
    /// Lattice row of the farthest destination, measured from the trunk.
    reach: usize,
    dests: Vec<NtIndex>,
}

/// Destinations served through one router row (above or below the source).
#[derive(Default)]
struct RowGroup {
    /// Same-row destinations delivered straight from the trunk: lattice x.
    straight: Vec<(usize, NtIndex)>,
    /// Turn column → vertical branch.
    branches: BTreeMap<usize, Branch>,
    /// Destination directly across the injection RT0.
    across: Option<NtIndex>,
}

impl RowGroup {
    fn is_empty(&self) -> bool {
        self.straight.is_empty() && self.branches.is_empty() && self.across.is_none()
    }
}

/// Builds the shared-path multicast tree for one source axon.
pub fn route_axon(
    source: NeuronId,
    destinations: &BTreeSet<NtIndex>,
    lattice: &TileLattice,
) -> Result<RouteTree> {
    let config = lattice.config();
    if destinations.is_empty() {
        return Err(Error::Domain("route needs at least one destination".into()));
    }
    for &nt in destinations.iter().chain(std::iter::once(&source.tile)) {
        if !config.contains(nt) {
            return Err(Error::Domain(format!("{nt} outside the grid")));
        }
    }

    let (a, b) = (source.tile.col, source.tile.row);
    let (sx, sy) = (2 * a, 2 * b);
    let unroutable = |dst: NtIndex| Error::Unroutable {
        src: source.tile.to_string(),
        dst: dst.to_string(),
    };

    let mut builder = TreeBuilder::default();
    // Index 0: router row below the source (y + 1); index 1: above (y − 1).
    let mut groups = [RowGroup::default(), RowGroup::default()];

    for &dest in destinations {
        let (c, d) = (dest.col, dest.row);
        let m = a.abs_diff(c);
        let n = b.abs_diff(d);
        match (m, n) {
            (0, 0) => {}
            (1, 0) => {
                let x = if c > a { sx + 1 } else { sx - 1 };
                let tile = TileId::at(x, sy);
                builder.push(tile, Upstream::Source);
                builder.deliver(tile, dest);
            }
            _ => {
                let below = if n == 0 {
                    if config.nt_rows < 2 {
                        return Err(unroutable(dest));
                    }
                    b + 1 < config.nt_rows
                } else {
                    d > b
                };
                let group = &mut groups[if below { 0 } else { 1 }];
                if n == 0 {
                    group.straight.push((2 * c, dest));
                } else if m == 0 && n == 1 {
                    group.across = Some(dest);
                } else {
                    let column = if c > a {
                        2 * c - 1
                    } else if c < a {
                        2 * c + 1
                    } else if config.nt_cols < 2 {
                        return Err(unroutable(dest));
                    } else if a + 1 < config.nt_cols {
                        sx + 1
                    } else {
                        sx - 1
                    };
                    let branch = group.branches.entry(column).or_default();
                    branch.reach = branch.reach.max(2 * n - 1);
                    branch.dests.push(dest);
                }
            }
        }
    }

    for (gi, group) in groups.iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        let below = gi == 0;
        let row = if below { sy + 1 } else { sy - 1 };
        let entry = TileId::at(sx, row);
        builder.push(entry, Upstream::Source);
        if let Some(dest) = group.across {
            builder.deliver(entry, dest);
        }

        let reach_xs = group.straight.iter().map(|&(x, _)| x).chain(group.branches.keys().copied());
        let east = reach_xs.clone().filter(|&x| x > sx).max();
        let west = reach_xs.filter(|&x| x < sx).min();
        if let Some(east) = east {
            for x in sx + 1..=east {
                builder.push(TileId::at(x, row), Upstream::Tile(TileId::at(x - 1, row)));
            }
        }
        if let Some(west) = west {
            for x in (west..sx).rev() {
                builder.push(TileId::at(x, row), Upstream::Tile(TileId::at(x + 1, row)));
            }
        }
        for &(x, dest) in &group.straight {
            builder.deliver(TileId::at(x, row), dest);
        }
        for (&column, branch) in &group.branches {
            let mut prev = TileId::at(column, row);
            for step in 1..=branch.reach {
                let y = if below { row + step } else { row - step };
                let tile = TileId::at(column, y);
                builder.push(tile, Upstream::Tile(prev));
                prev = tile;
            }
            for &dest in &branch.dests {
                builder.deliver(TileId::at(column, 2 * dest.row), dest);
            }
        }
    }

    Ok(RouteTree { source, destinations: destinations.clone(), nodes: builder.nodes })
}

/// Fan-in rows used on one neuron tile.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NtFanIn {
    /// Rows fed back from the tile's own neurons; always reserved.
    pub local: usize,
    /// One row per remote source neuron with at least one synapse here.
    pub remote: usize,
    /// One row per dataset input channel injected here.
    pub input: usize,
}

impl NtFanIn {
    pub fn total(&self) -> usize {
        self.local + self.remote + self.input
    }
}

/// Per-tile crossbar input usage of a mapped network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccupancyMap {
    config: GridConfig,
    /// Distinct axons per lattice site (row-major); zero on NT sites.
    rt: Vec<usize>,
    nt: Vec<NtFanIn>,
}

impl OccupancyMap {
    fn empty(lattice: &TileLattice, placement: &Placement) -> Self {
        let config = *lattice.config();
        let nt = placement
            .tile_loads()
            .into_iter()
            .map(|local| NtFanIn { local, ..NtFanIn::default() })
            .collect();
        OccupancyMap { config, rt: vec![0; lattice.tiles().len()], nt }
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    fn site(&self, tile: &TileId) -> usize {
        tile.y * self.config.lattice_width() + tile.x
    }

    pub fn rt_load(&self, tile: &TileId) -> usize {
        self.rt[self.site(tile)]
    }

    pub fn nt_fan_in(&self, nt: NtIndex) -> NtFanIn {
        self.nt[nt.linear(&self.config)]
    }

    /// Rows required on any tile: NT fan-in or router load.
    pub fn required(&self, tile: &TileId) -> usize {
        match tile.nt() {
            Some(nt) => self.nt_fan_in(nt).total(),
            None => self.rt_load(tile),
        }
    }

    pub fn capacity(&self, kind: TileKind) -> usize {
        match kind {
            TileKind::Nt => self.config.nt_input_size,
            _ => self.config.rt_size,
        }
    }

    /// `(tile, load)` for every router site.
    pub fn router_loads(&self) -> impl Iterator<Item = (TileId, usize)> + '_ {
        let w = self.config.lattice_width();
        self.rt.iter().enumerate().filter_map(move |(i, &load)| {
            let tile = TileId::at(i % w, i / w);
            tile.kind.is_router().then_some((tile, load))
        })
    }

    pub fn nt_fan_ins(&self) -> impl Iterator<Item = (NtIndex, NtFanIn)> + '_ {
        self.nt.iter().enumerate().map(|(i, &f)| (NtIndex::from_linear(i, &self.config), f))
    }

    pub fn peak_nt_fanin(&self) -> usize {
        self.nt.iter().map(NtFanIn::total).max().unwrap_or(0)
    }

    /// Largest load among router tiles of `kind`.
    pub fn peak_load(&self, kind: TileKind) -> usize {
        if kind == TileKind::Nt {
            return self.peak_nt_fanin();
        }
        self.router_loads().filter(|(t, _)| t.kind == kind).map(|(_, l)| l).max().unwrap_or(0)
    }

    pub fn peak_rt_load(&self) -> usize {
        self.rt.iter().copied().max().unwrap_or(0)
    }

    /// Occupied crossbar input rows over all tiles.
    pub fn memory_count(&self) -> usize {
        self.nt.iter().map(NtFanIn::total).sum::<usize>() + self.rt.iter().sum::<usize>()
    }

    pub fn total_rt_load(&self) -> usize {
        self.rt.iter().sum()
    }

    pub fn add_inputs(&mut self, inputs: &InputProjection) {
        for (i, rows) in inputs.rows_per_tile(&self.config).into_iter().enumerate() {
            self.nt[i].input += rows;
        }
    }

    fn add_tree(&mut self, tree: &RouteTree) {
        for tile in tree.tiles() {
            let site = self.site(tile);
            self.rt[site] += 1;
        }
        for dest in tree.destinations() {
            if *dest != tree.source().tile {
                let i = dest.linear(&self.config);
                self.nt[i].remote += 1;
            }
        }
    }

    /// One CSV row per tile: `tile_kind,x,y,required,capacity`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut rows = Vec::new();
        for (nt, f) in self.nt_fan_ins() {
            let t = nt.tile();
            rows.push((t, f.total()));
        }
        rows.extend(self.router_loads());
        rows.sort_by_key(|(t, _)| (t.y, t.x));
        w.write_record(["tile_kind", "x", "y", "required", "capacity"]).map_err(|e| csv_error(path, e))?;
        for (t, required) in rows {
            w.write_record([
                t.kind.as_str().to_string(),
                t.x.to_string(),
                t.y.to_string(),
                required.to_string(),
                self.capacity(t.kind).to_string(),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

/// Remote destination tiles of neuron `pre` under `mask`.
fn remote_destinations(mask: &Mask, placement: &Placement, pre: usize) -> BTreeSet<NtIndex> {
    let home = placement.tile_of(pre);
    mask.row(pre).map(|post| placement.tile_of(post)).filter(|&t| t != home).collect()
}

fn check_shapes(mask: &Mask, placement: &Placement, lattice: &TileLattice) -> Result<()> {
    let (pc, lc) = (placement.config(), lattice.config());
    if (pc.nt_rows, pc.nt_cols, pc.neurons_per_tile) != (lc.nt_rows, lc.nt_cols, lc.neurons_per_tile) {
        return Err(Error::Domain("placement was built for a different grid".into()));
    }
    let n = placement.n_neurons();
    if mask.rows() != n || mask.cols() != n {
        return Err(Error::Domain(format!(
            "mask is {}x{} but the placement has {n} neurons",
            mask.rows(),
            mask.cols()
        )));
    }
    Ok(())
}

/// Exact per-tile occupancy of the recurrent connectivity `mask`. Every
/// source neuron with remote targets adds one row to each router of its
/// tree and one fan-in row to each remote destination tile.
pub fn compute_occupancy(mask: &Mask, placement: &Placement, lattice: &TileLattice) -> Result<OccupancyMap> {
    check_shapes(mask, placement, lattice)?;
    let mut occupancy = OccupancyMap::empty(lattice, placement);
    for pre in 0..placement.n_neurons() {
        let dests = remote_destinations(mask, placement, pre);
        if dests.is_empty() {
            continue;
        }
        let tree = route_axon(placement.neuron(pre), &dests, lattice)?;
        occupancy.add_tree(&tree);
    }
    Ok(occupancy)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub tile: TileId,
    pub required: usize,
    pub capacity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappabilityReport {
    pub mappable: bool,
    pub violations: Vec<Violation>,
    pub peak_nt_fanin: usize,
    pub peak_rt_load: usize,
    pub memory_count: usize,
}

impl MappabilityReport {
    pub fn from_occupancy(occupancy: &OccupancyMap) -> Self {
        let config = occupancy.config();
        let mut violations = Vec::new();
        for (nt, fan_in) in occupancy.nt_fan_ins() {
            if fan_in.total() > config.nt_input_size {
                violations.push(Violation {
                    tile: nt.tile(),
                    required: fan_in.total(),
                    capacity: config.nt_input_size,
                });
            }
        }
        for (tile, load) in occupancy.router_loads() {
            if load > config.rt_size {
                violations.push(Violation { tile, required: load, capacity: config.rt_size });
            }
        }
        violations.sort_by_key(|v| (v.tile.y, v.tile.x));
        MappabilityReport {
            mappable: violations.is_empty(),
            violations,
            peak_nt_fanin: occupancy.peak_nt_fanin(),
            peak_rt_load: occupancy.peak_rt_load(),
            memory_count: occupancy.memory_count(),
        }
    }
}

impl fmt::Display for MappabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mappable: {}", if self.mappable { "yes" } else { "no" })?;
        writeln!(f, "peak NT fan-in: {}", self.peak_nt_fanin)?;
        writeln!(f, "peak RT load: {}", self.peak_rt_load)?;
        writeln!(f, "memory elements: {}", self.memory_count)?;
        if !self.violations.is_empty() {
            writeln!(f, "violations ({}):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  {}: requires {} rows, capacity {}", v.tile, v.required, v.capacity)?;
            }
        }
        Ok(())
    }
}

/// Maps a network (recurrent mask plus input channels) and checks every
/// tile against the capacities of the lattice's grid.
pub fn check_mappable(
    mask: &Mask,
    placement: &Placement,
    lattice: &TileLattice,
    inputs: &InputProjection,
) -> Result<MappabilityReport> {
    let mut occupancy = compute_occupancy(mask, placement, lattice)?;
    occupancy.add_inputs(inputs);
    Ok(MappabilityReport::from_occupancy(&occupancy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::hop_distance;

    fn lattice(rows: usize, cols: usize, npt: usize) -> TileLattice {
        TileLattice::new(GridConfig::unbounded(rows, cols, npt).unwrap()).unwrap()
    }

    fn src(row: usize, col: usize) -> NeuronId {
        NeuronId { tile: NtIndex::new(row, col), local_index: 0 }
    }

    fn dests(list: &[(usize, usize)]) -> BTreeSet<NtIndex> {
        list.iter().map(|&(r, c)| NtIndex::new(r, c)).collect()
    }

    #[test]
    fn empty_destinations_is_error() {
        let l = lattice(2, 2, 1);
        assert!(matches!(route_axon(src(0, 0), &BTreeSet::new(), &l), Err(Error::Domain(_))));
    }

    #[test]
    fn own_tile_only_gives_empty_tree() {
        let l = lattice(2, 2, 1);
        let tree = route_axon(src(1, 1), &dests(&[(1, 1)]), &l).unwrap();
        assert!(tree.is_empty());
        assert_eq!(tree.path_to(NtIndex::new(1, 1)), Some(vec![]));
    }

    #[test]
    fn adjacent_destination_uses_shared_rt0() {
        let l = lattice(2, 2, 1);
        let tree = route_axon(src(0, 0), &dests(&[(0, 1)]), &l).unwrap();
        assert_eq!(tree.tiles().copied().collect::<Vec<_>>(), vec![TileId::at(1, 0)]);
        assert_eq!(tree.tiles().next().unwrap().kind, TileKind::Rt0);
    }

    #[test]
    fn diagonal_destination_turns_at_rt1() {
        let l = lattice(2, 2, 1);
        let tree = route_axon(src(0, 0), &dests(&[(1, 1)]), &l).unwrap();
        let path = tree.path_to(NtIndex::new(1, 1)).unwrap();
        assert_eq!(path, vec![TileId::at(0, 1), TileId::at(1, 1), TileId::at(1, 2)]);
        let kinds: Vec<_> = path.iter().map(|t| t.kind).collect();
        assert_eq!(kinds, vec![TileKind::Rt0, TileKind::Rt1, TileKind::Rt0]);
    }

    #[test]
    fn same_column_destinations_share_vertical_segment() {
        let l = lattice(4, 3, 1);
        let pair = dests(&[(2, 2), (3, 2)]);
        let tree = route_axon(src(0, 0), &pair, &l).unwrap();
        let separate: usize = pair
            .iter()
            .map(|d| route_axon(src(0, 0), &dests(&[(d.row, d.col)]), &l).unwrap().len())
            .sum();
        assert!(tree.len() < separate);
        let union: BTreeSet<TileId> = pair
            .iter()
            .flat_map(|d| route_axon(src(0, 0), &dests(&[(d.row, d.col)]), &l).unwrap().tiles().copied().collect::<Vec<_>>())
            .collect();
        assert_eq!(tree.len(), union.len());
        // Both branch off the shared column at RT0s of x = 3.
        let a = tree.path_to(NtIndex::new(2, 2)).unwrap();
        let b = tree.path_to(NtIndex::new(3, 2)).unwrap();
        assert_eq!(&b[..a.len()], &a[..]);
    }

    #[test]
    fn single_destination_path_length_is_hop_distance() {
        for (rows, cols) in [(1, 2), (2, 1), (3, 3), (2, 4), (4, 4)] {
            let l = lattice(rows, cols, 1);
            for s in l.config().nt_indices() {
                for d in l.config().nt_indices() {
                    let tree = route_axon(NeuronId { tile: s, local_index: 0 }, &[d].into(), &l);
                    match hop_distance(s, d, l.config()) {
                        Ok(h) => assert_eq!(tree.unwrap().len(), h, "{s} -> {d}"),
                        Err(_) => assert!(tree.is_err()),
                    }
                }
            }
        }
    }

    #[test]
    fn occupancy_examples() {
        let l = lattice(1, 2, 2);
        let p = Placement::blocked(l.config());
        let empty = compute_occupancy(&Mask::square(4), &p, &l).unwrap();
        assert_eq!(empty.total_rt_load(), 0);
        assert!(empty.nt_fan_ins().all(|(_, f)| f.remote == 0 && f.input == 0));

        // Neuron 0 on NT(0,0) to neuron 2 on NT(0,1).
        let one = Mask::from_pairs(4, [(0, 2)]).unwrap();
        let occ = compute_occupancy(&one, &p, &l).unwrap();
        assert_eq!(occ.rt_load(&TileId::at(1, 0)), 1);
        assert_eq!(occ.nt_fan_in(NtIndex::new(0, 1)).total(), 2 + 1);
        assert_eq!(occ.nt_fan_in(NtIndex::new(0, 0)).total(), 2);

        // Two synapses of one axon onto the same remote tile share a row.
        let shared = Mask::from_pairs(4, [(0, 2), (0, 3)]).unwrap();
        let occ = compute_occupancy(&shared, &p, &l).unwrap();
        assert_eq!(occ.nt_fan_in(NtIndex::new(0, 1)).remote, 1);
        assert_eq!(occ.rt_load(&TileId::at(1, 0)), 1);
    }

    #[test]
    fn fully_connected_single_tile() {
        let config = GridConfig::new(1, 1, 4, 4, 1).unwrap();
        let l = TileLattice::new(config).unwrap();
        let p = Placement::blocked(&config);
        let all = Mask::from_pairs(4, (0..4).flat_map(|i| (0..4).map(move |j| (i, j)))).unwrap();
        let occ = compute_occupancy(&all, &p, &l).unwrap();
        assert_eq!(occ.nt_fan_in(NtIndex::new(0, 0)).total(), 4);
        assert_eq!(occ.peak_rt_load(), 0);
        let report = check_mappable(&all, &p, &l, &InputProjection::none()).unwrap();
        assert!(report.mappable, "zero slack must still fit");
    }

    #[test]
    fn empty_network_mappable() {
        let config = GridConfig::new(3, 3, 4, 4, 1).unwrap();
        let l = TileLattice::new(config).unwrap();
        let p = Placement::blocked(&config);
        let report = check_mappable(&Mask::square(36), &p, &l, &InputProjection::none()).unwrap();
        assert!(report.mappable);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn overloaded_central_rt1_is_reported() {
        // 3x3 grid, one neuron per tile. Routes NT(0,0)->NT(1,1) and
        // NT(0,1)->NT(1,0) both turn at RT1(1,1); NT(2,2)->NT(1,1) does not.
        let config = GridConfig::new(3, 3, 1, 8, 1).unwrap();
        let l = TileLattice::new(config).unwrap();
        let p = Placement::blocked(&config);
        let id = |r: usize, c: usize| r * 3 + c;
        let mask = Mask::from_pairs(9, [(id(0, 0), id(1, 1)), (id(0, 1), id(1, 0))]).unwrap();
        let report = check_mappable(&mask, &p, &l, &InputProjection::none()).unwrap();
        assert!(!report.mappable);
        let rt1: Vec<_> = report.violations.iter().filter(|v| v.tile.kind == TileKind::Rt1).collect();
        assert_eq!(rt1.len(), 1);
        assert_eq!(rt1[0].tile, TileId::at(1, 1));
        assert_eq!((rt1[0].required, rt1[0].capacity), (2, 1));
    }

    #[test]
    fn inputs_consume_fan_in_rows_only() {
        let config = GridConfig::new(2, 2, 2, 3, 1).unwrap();
        let l = TileLattice::new(config).unwrap();
        let p = Placement::blocked(&config);
        let inputs = InputProjection::new(6, crate::topology::InputPlacement::RoundRobin, &config);
        let report = check_mappable(&Mask::square(8), &p, &l, &inputs).unwrap();
        // Tiles 0 and 1 receive two channels each: 2 local + 2 input > 3.
        assert_eq!(report.violations.len(), 2);
        assert_eq!(report.peak_rt_load, 0);
    }
}
