//! Tiled fabric geometry.
//!
//! Neuron tiles (NT) sit on the even/even sites of a checkerboard lattice of
//! size `(2·nt_cols − 1) × (2·nt_rows − 1)`. Sites with exactly one odd
//! coordinate hold straight-through routers (RT0), odd/odd sites hold turning
//! routers (RT1). An NT at grid position `(row, col)` lives at lattice site
//! `(x, y) = (2·col, 2·row)`. There is no wraparound.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry and crossbar capacities of the fabric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridConfig {
    pub nt_rows: usize,
    pub nt_cols: usize,
    pub neurons_per_tile: usize,
    /// Input rows of each NT crossbar (local, remote and input-layer rows).
    pub nt_input_size: usize,
    /// Input rows of each RT crossbar: distinct axons a router can carry.
    pub rt_size: usize,
}

impl GridConfig {
    pub fn new(
        nt_rows: usize,
        nt_cols: usize,
        neurons_per_tile: usize,
        nt_input_size: usize,
        rt_size: usize,
    ) -> Result<Self> {
        let config = GridConfig { nt_rows, nt_cols, neurons_per_tile, nt_input_size, rt_size };
        config.validate()?;
        Ok(config)
    }

    /// A grid whose capacities never bind; handy for measuring occupancy.
    pub fn unbounded(nt_rows: usize, nt_cols: usize, neurons_per_tile: usize) -> Result<Self> {
        Self::new(nt_rows, nt_cols, neurons_per_tile, usize::MAX, usize::MAX)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nt_rows == 0 || self.nt_cols == 0 {
            return Err(Error::Config(format!(
                "grid must have at least one NT row and column (got {}x{})",
                self.nt_rows, self.nt_cols
            )));
        }
        if self.neurons_per_tile == 0 {
            return Err(Error::Config("neurons_per_tile must be >= 1".into()));
        }
        if self.nt_input_size < self.neurons_per_tile {
            return Err(Error::Config(format!(
                "nt_input_size ({}) must hold the tile's own recurrent rows ({})",
                self.nt_input_size, self.neurons_per_tile
            )));
        }
        if self.rt_size == 0 {
            return Err(Error::Config("rt_size must be >= 1".into()));
        }
        Ok(())
    }

    pub fn n_tiles(&self) -> usize {
        self.nt_rows * self.nt_cols
    }

    pub fn n_neurons(&self) -> usize {
        self.n_tiles() * self.neurons_per_tile
    }

    pub fn lattice_width(&self) -> usize {
        2 * self.nt_cols - 1
    }

    pub fn lattice_height(&self) -> usize {
        2 * self.nt_rows - 1
    }

    pub fn contains(&self, nt: NtIndex) -> bool {
        nt.row < self.nt_rows && nt.col < self.nt_cols
    }

    /// All neuron tiles in row-major order.
    pub fn nt_indices(&self) -> impl Iterator<Item = NtIndex> + '_ {
        (0..self.nt_rows).flat_map(move |row| (0..self.nt_cols).map(move |col| NtIndex { row, col }))
    }

    /// Largest hop distance between any two routable neuron tiles.
    pub fn d_max(&self) -> usize {
        let mut best = 0;
        for a in self.nt_indices() {
            for b in self.nt_indices() {
                if let Ok(d) = hop_distance(a, b, self) {
                    best = best.max(d);
                }
            }
        }
        best
    }
}

/// Grid position of a neuron tile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NtIndex {
    pub row: usize,
    pub col: usize,
}

impl NtIndex {
    pub fn new(row: usize, col: usize) -> Self {
        NtIndex { row, col }
    }

    pub fn linear(&self, config: &GridConfig) -> usize {
        self.row * config.nt_cols + self.col
    }

    pub fn from_linear(index: usize, config: &GridConfig) -> Self {
        NtIndex { row: index / config.nt_cols, col: index % config.nt_cols }
    }

    pub fn tile(&self) -> TileId {
        TileId { x: 2 * self.col, y: 2 * self.row, kind: TileKind::Nt }
    }
}

impl fmt::Display for NtIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NT(r{},c{})", self.row, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TileKind {
    #[serde(rename = "NT")]
    Nt,
    #[serde(rename = "RT0")]
    Rt0,
    #[serde(rename = "RT1")]
    Rt1,
}

impl TileKind {
    /// Kind of the lattice site `(x, y)`, a pure function of coordinate parity.
    pub fn at(x: usize, y: usize) -> TileKind {
        match (x % 2, y % 2) {
            (0, 0) => TileKind::Nt,
            (1, 1) => TileKind::Rt1,
            _ => TileKind::Rt0,
        }
    }

    pub fn is_router(&self) -> bool {
        !matches!(self, TileKind::Nt)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TileKind::Nt => "NT",
            TileKind::Rt0 => "RT0",
            TileKind::Rt1 => "RT1",
        }
    }
}

impl fmt::Display for TileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A lattice site. `x` is the lattice column, `y` the lattice row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileId {
    pub x: usize,
    pub y: usize,
    pub kind: TileKind,
}

impl TileId {
    pub fn at(x: usize, y: usize) -> TileId {
        TileId { x, y, kind: TileKind::at(x, y) }
    }

    /// The neuron tile at this site, if it is one.
    pub fn nt(&self) -> Option<NtIndex> {
        (self.kind == TileKind::Nt).then(|| NtIndex { row: self.y / 2, col: self.x / 2 })
    }

    pub fn is_adjacent(&self, other: &TileId) -> bool {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y) == 1
    }
}

impl fmt::Display for TileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.kind, self.x, self.y)
    }
}

/// A neuron, addressed by its tile and its slot on that tile's crossbar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NeuronId {
    pub tile: NtIndex,
    pub local_index: usize,
}

/// The full set of tiles of a grid.
#[derive(Clone, Debug)]
pub struct TileLattice {
    config: GridConfig,
    tiles: Vec<TileId>,
}

impl TileLattice {
    pub fn new(config: GridConfig) -> Result<Self> {
        build_lattice(config)
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn width(&self) -> usize {
        self.config.lattice_width()
    }

    pub fn height(&self) -> usize {
        self.config.lattice_height()
    }

    /// Tiles in row-major lattice order.
    pub fn tiles(&self) -> &[TileId] {
        &self.tiles
    }

    pub fn tile(&self, x: usize, y: usize) -> Option<TileId> {
        (x < self.width() && y < self.height()).then(|| TileId::at(x, y))
    }

    pub fn count(&self, kind: TileKind) -> usize {
        self.tiles.iter().filter(|t| t.kind == kind).count()
    }

    pub fn routers(&self) -> impl Iterator<Item = &TileId> {
        self.tiles.iter().filter(|t| t.kind.is_router())
    }

    /// Row-major index of a tile in [`TileLattice::tiles`].
    pub fn tile_index(&self, tile: &TileId) -> usize {
        tile.y * self.width() + tile.x
    }

    /// In-bounds 4-neighbours of a site.
    pub fn neighbors(&self, tile: &TileId) -> impl Iterator<Item = TileId> + '_ {
        let (x, y) = (tile.x as isize, tile.y as isize);
        [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]
            .into_iter()
            .filter(move |&(nx, ny)| {
                nx >= 0 && ny >= 0 && (nx as usize) < self.width() && (ny as usize) < self.height()
            })
            .map(|(nx, ny)| TileId::at(nx as usize, ny as usize))
    }
}

pub fn build_lattice(config: GridConfig) -> Result<TileLattice> {
    config.validate()?;
    let (w, h) = (config.lattice_width(), config.lattice_height());
    let tiles = (0..h).flat_map(|y| (0..w).map(move |x| TileId::at(x, y))).collect();
    Ok(TileLattice { config, tiles })
}

/// Number of routing tiles a spike crosses from `src` to `dst` on the
/// one-turn route; 0 within a tile.
///
/// With `m` = column offset and `n` = row offset: neighbours share one RT0;
/// otherwise a route enters the router row beside the source, runs along x
/// and turns once onto the router column beside the destination, giving
/// `2m + 2n − 1` tiles, or `2k + 1` for a straight offset of `k ≥ 2`.
pub fn hop_distance(src: NtIndex, dst: NtIndex, config: &GridConfig) -> Result<usize> {
    for nt in [src, dst] {
        if !config.contains(nt) {
            return Err(Error::Domain(format!(
                "{nt} outside {}x{} grid",
                config.nt_rows, config.nt_cols
            )));
        }
    }
    let m = src.col.abs_diff(dst.col);
    let n = src.row.abs_diff(dst.row);
    let unroutable = || Error::Unroutable { src: src.to_string(), dst: dst.to_string() };
    Ok(match (m, n) {
        (0, 0) => 0,
        (1, 0) | (0, 1) => 1,
        (m, 0) => {
            if config.nt_rows < 2 {
                return Err(unroutable());
            }
            2 * m + 1
        }
        (0, n) => {
            if config.nt_cols < 2 {
                return Err(unroutable());
            }
            2 * n + 1
        }
        (m, n) => 2 * m + 2 * n - 1,
    })
}

/// Ordered neuron pairs whose tiles are `d` hops apart, assuming every tile
/// is fully populated. Empty buckets (including `d > d_max`) are 0.
pub fn bucket_size(d: usize, config: &GridConfig) -> usize {
    let per_pair = config.neurons_per_tile * config.neurons_per_tile;
    let mut tile_pairs = 0;
    for a in config.nt_indices() {
        for b in config.nt_indices() {
            if matches!(hop_distance(a, b, config), Ok(h) if h == d) {
                tile_pairs += 1;
            }
        }
    }
    tile_pairs * per_pair
}

/// Assignment of network neurons to neuron tiles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    config: GridConfig,
    neurons: Vec<NeuronId>,
}

impl Placement {
    /// Neuron `i` goes to tile `i / neurons_per_tile` (row-major), filling
    /// every tile.
    pub fn blocked(config: &GridConfig) -> Self {
        let npt = config.neurons_per_tile;
        let neurons = (0..config.n_neurons())
            .map(|i| NeuronId { tile: NtIndex::from_linear(i / npt, config), local_index: i % npt })
            .collect();
        Placement { config: *config, neurons }
    }

    /// Arbitrary tile assignment; local slots are given in neuron order.
    pub fn from_tiles(config: &GridConfig, tiles: &[NtIndex]) -> Result<Self> {
        let mut used = vec![0usize; config.n_tiles()];
        let mut neurons = Vec::with_capacity(tiles.len());
        for (i, &tile) in tiles.iter().enumerate() {
            if !config.contains(tile) {
                return Err(Error::Domain(format!("neuron {i} placed on {tile}, outside the grid")));
            }
            let slot = &mut used[tile.linear(config)];
            if *slot >= config.neurons_per_tile {
                return Err(Error::Domain(format!(
                    "{tile} holds more than {} neurons",
                    config.neurons_per_tile
                )));
            }
            neurons.push(NeuronId { tile, local_index: *slot });
            *slot += 1;
        }
        Ok(Placement { config: *config, neurons })
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn n_neurons(&self) -> usize {
        self.neurons.len()
    }

    pub fn neuron(&self, i: usize) -> NeuronId {
        self.neurons[i]
    }

    pub fn tile_of(&self, i: usize) -> NtIndex {
        self.neurons[i].tile
    }

    pub fn neurons(&self) -> &[NeuronId] {
        &self.neurons
    }

    /// Neurons hosted per tile, indexed by linear NT index.
    pub fn tile_loads(&self) -> Vec<usize> {
        let mut loads = vec![0; self.config.n_tiles()];
        for n in &self.neurons {
            loads[n.tile.linear(&self.config)] += 1;
        }
        loads
    }

    /// Network neurons hosted on `tile`, in neuron order.
    pub fn neurons_on(&self, tile: NtIndex) -> Vec<usize> {
        (0..self.neurons.len()).filter(|&i| self.neurons[i].tile == tile).collect()
    }
}

/// How dataset input channels enter the fabric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputPlacement {
    /// Channel `c` drives every neuron of tile `c mod n_tiles`.
    #[default]
    RoundRobin,
    /// Every channel drives every tile.
    Broadcast,
}

/// Input channels and the neuron tiles each one is injected into. An input
/// channel takes one fan-in row on each of its tiles and no router slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputProjection {
    targets: Vec<Vec<NtIndex>>,
}

impl InputProjection {
    pub fn new(n_channels: usize, placement: InputPlacement, config: &GridConfig) -> Self {
        let all: Vec<NtIndex> = config.nt_indices().collect();
        let targets = (0..n_channels)
            .map(|c| match placement {
                InputPlacement::RoundRobin => vec![all[c % all.len()]],
                InputPlacement::Broadcast => all.clone(),
            })
            .collect();
        InputProjection { targets }
    }

    pub fn none() -> Self {
        InputProjection { targets: Vec::new() }
    }

    pub fn n_channels(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self, channel: usize) -> &[NtIndex] {
        &self.targets[channel]
    }

    /// Input rows consumed per tile, indexed by linear NT index.
    pub fn rows_per_tile(&self, config: &GridConfig) -> Vec<usize> {
        let mut rows = vec![0; config.n_tiles()];
        for t in self.targets.iter().flatten() {
            rows[t.linear(config)] += 1;
        }
        rows
    }
}
