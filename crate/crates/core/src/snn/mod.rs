//! Recurrent leaky integrate-and-fire network trained with surrogate
//! gradients through time.
//!
//! One step, with `α = exp(-1/τ_mem)`, `β = exp(-1/τ_syn)` (or no synaptic
//! filter) and `κ = exp(-1/τ_out)`:
//!
//! ```text
//! s[t]   = H(v[t] - θ)                     (gated off while refractory)
//! i[t]   = β i[t-1] + W_inᵀ x[t] + W_recᵀ s[t]
//! v[t+1] = α (v[t] (1 - s[t]) + v_reset s[t]) + (1 - α) i[t]
//! y[t+1] = κ y[t] + (1 - κ) W_outᵀ s[t]
//! ```
//!
//! The class logits are `Σ_{t=1..T} y[t]`.

mod network;
mod optim;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::Mask;

pub use network::{
    evaluate, lif_forward, loss, softmax_cross_entropy, BatchResult, ForwardOutput, Gradients, Network,
    SpikeMode, SpikeRaster, SpikeTensor, Trace,
};
pub use optim::{Optimizer, OptimizerConfig};
pub use train::{train, train_observed, Dataset, EpochRecord, MappingCheck, TrainConfig, TrainOutcome, TrainStatus, TrainingLog};

/// Neuron constants. Time constants are in steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifParams {
    pub tau_mem: f64,
    /// Optional first-order synaptic current filter.
    pub tau_syn: Option<f64>,
    /// Leak of the non-spiking readout integrator.
    pub tau_out: f64,
    pub v_threshold: f64,
    pub v_reset: f64,
    pub refractory: usize,
    pub surrogate_beta: f64,
}

impl Default for LifParams {
    fn default() -> Self {
        LifParams {
            tau_mem: 10.0,
            tau_syn: None,
            tau_out: 10.0,
            v_threshold: 1.0,
            v_reset: 0.0,
            refractory: 0,
            surrogate_beta: 10.0,
        }
    }
}

impl LifParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("tau_mem", self.tau_mem)?;
        positive("tau_out", self.tau_out)?;
        positive("surrogate_beta", self.surrogate_beta)?;
        if let Some(tau) = self.tau_syn {
            positive("tau_syn", tau)?;
        }
        if !(self.v_threshold > self.v_reset) {
            return Err(Error::Config(format!(
                "v_threshold ({}) must exceed v_reset ({})",
                self.v_threshold, self.v_reset
            )));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        (-1.0 / self.tau_mem).exp()
    }

    /// Synaptic decay per step; 0 without a synaptic filter.
    pub fn beta_syn(&self) -> f64 {
        self.tau_syn.map_or(0.0, |tau| (-1.0 / tau).exp())
    }

    pub fn kappa(&self) -> f64 {
        (-1.0 / self.tau_out).exp()
    }
}

/// Fast-sigmoid pseudo-derivative `1 / (1 + β|x|)²`.
#[inline]
pub fn surrogate_grad(x: f64, beta: f64) -> f64 {
    let d = 1.0 + beta * x.abs();
    1.0 / (d * d)
}

/// Weights of the network. Matrices are row-major with the presynaptic
/// index first: `w_in[c * n + j]`, `w_rec[i * n + j]`, `w_out[i * k + c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub n_inputs: usize,
    pub n_neurons: usize,
    pub n_classes: usize,
    pub w_in: Vec<f64>,
    /// Input channel to neuron wiring (fixed by input placement).
    pub in_mask: Mask,
    pub w_rec: Vec<f64>,
    /// Active recurrent connections.
    pub rec_mask: Mask,
    pub w_out: Vec<f64>,
}

impl NetworkParams {
    /// All-zero weights with an empty recurrent mask.
    pub fn zeros(in_mask: Mask, n_classes: usize) -> Self {
        let (n_inputs, n_neurons) = (in_mask.rows(), in_mask.cols());
        NetworkParams {
            n_inputs,
            n_neurons,
            n_classes,
            w_in: vec![0.0; n_inputs * n_neurons],
            in_mask,
            w_rec: vec![0.0; n_neurons * n_neurons],
            rec_mask: Mask::square(n_neurons),
            w_out: vec![0.0; n_neurons * n_classes],
        }
    }

    /// Inactive entries of `w_in` and `w_rec` must be exactly zero.
    pub fn check_consistency(&self) -> Result<()> {
        for (name, w, mask) in [("w_in", &self.w_in, &self.in_mask), ("w_rec", &self.w_rec, &self.rec_mask)] {
            if let Some(i) = (0..w.len()).find(|&i| !mask.get_flat(i) && w[i] != 0.0) {
                return Err(Error::Domain(format!(
                    "{name}[{}, {}] = {} outside the mask",
                    i / mask.cols(),
                    i % mask.cols(),
                    w[i]
                )));
            }
        }
        Ok(())
    }

    /// Input mask from per-channel target neurons.
    pub fn input_mask(n_inputs: usize, n_neurons: usize, targets: impl Fn(usize) -> Vec<usize>) -> Mask {
        let mut mask = Mask::new(n_inputs, n_neurons);
        for c in 0..n_inputs {
            for j in targets(c) {
                mask.insert(c, j);
            }
        }
        mask
    }
}
