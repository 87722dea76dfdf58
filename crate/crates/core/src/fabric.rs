//! A grid with its neurons and input channels placed: everything needed to
//! route, profile and map one network.

use crate::error::Result;
use crate::mask::Mask;
use crate::profile::PairBuckets;
use crate::router::{check_mappable, MappabilityReport};
use crate::snn::MappingCheck;
use crate::topology::{GridConfig, InputPlacement, InputProjection, Placement, TileLattice};

#[derive(Clone, Debug)]
pub struct Fabric {
    pub lattice: TileLattice,
    pub placement: Placement,
    pub inputs: InputProjection,
    pub buckets: PairBuckets,
}

impl Fabric {
    /// Blocked neuron placement filling every tile.
    pub fn new(grid: GridConfig, n_channels: usize, input_placement: InputPlacement, allow_self: bool) -> Result<Self> {
        let lattice = TileLattice::new(grid)?;
        let placement = Placement::blocked(&grid);
        let inputs = InputProjection::new(n_channels, input_placement, &grid);
        let buckets = PairBuckets::new(&placement, &lattice, allow_self)?;
        Ok(Fabric { lattice, placement, inputs, buckets })
    }

    pub fn grid(&self) -> &GridConfig {
        self.lattice.config()
    }

    pub fn n_neurons(&self) -> usize {
        self.placement.n_neurons()
    }

    /// Channel `c` feeds every neuron on each of its target tiles.
    pub fn input_mask(&self) -> Mask {
        let mut mask = Mask::new(self.inputs.n_channels(), self.n_neurons());
        for c in 0..self.inputs.n_channels() {
            for &tile in self.inputs.targets(c) {
                for j in self.placement.neurons_on(tile) {
                    mask.insert(c, j);
                }
            }
        }
        mask
    }

    pub fn mapping(&self) -> MappingCheck<'_> {
        MappingCheck { placement: &self.placement, lattice: &self.lattice, inputs: &self.inputs }
    }

    pub fn check(&self, mask: &Mask) -> Result<MappabilityReport> {
        check_mappable(mask, &self.placement, &self.lattice, &self.inputs)
    }

    /// The same fabric with capacities that never bind.
    pub fn unbounded(&self) -> Result<Self> {
        let g = self.grid();
        let lattice = TileLattice::new(GridConfig::unbounded(g.nt_rows, g.nt_cols, g.neurons_per_tile)?)?;
        Ok(Fabric { lattice, ..self.clone() })
    }
}
