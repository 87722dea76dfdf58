//! Routing-aware sparse training for tiled neuromorphic fabrics.
//!
//! The fabric is a checkerboard of neuron tiles (NT) and routing tiles
//! (RT0 straight, RT1 turning). Spikes leave a neuron tile, travel along x,
//! turn at most once and are delivered sideways into the destination tile.
//! [`router`] builds the shared multicast trees and counts crossbar rows,
//! [`profile`] summarises a connectivity mask by hop distance, and
//! [`rewire`] keeps a recurrent spiking network ([`snn`]) on a fixed
//! per-distance budget while it trains.

pub mod cli;
pub mod container;
pub mod data;
pub mod error;
pub mod fabric;
pub mod mask;
pub mod profile;
pub mod rewire;
pub mod router;
pub mod seed;
pub mod snn;
pub mod topology;

pub use error::{Error, Result};
