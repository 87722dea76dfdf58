use serde::{Deserialize, Serialize};

use super::{Gradients, NetworkParams};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerConfig {
    Adam {
        #[serde(default = "default_lr")]
        lr: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    Sgd {
        #[serde(default = "default_lr")]
        lr: f64,
        #[serde(default)]
        momentum: f64,
    },
}

fn default_lr() -> f64 {
    1e-3
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::Adam { lr: default_lr(), beta1: default_beta1(), beta2: default_beta2(), eps: default_eps() }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            OptimizerConfig::Adam { lr, beta1, beta2, eps } => {
                lr > 0.0 && (0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && eps > 0.0
            }
            OptimizerConfig::Sgd { lr, momentum } => lr > 0.0 && (0.0..1.0).contains(&momentum),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid optimizer settings {self:?}")))
        }
    }
}

#[derive(Clone, Debug)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Moments {
    fn new(len: usize, second: bool) -> Self {
        Moments { m: vec![0.0; len], v: if second { vec![0.0; len] } else { Vec::new() } }
    }

    fn reset(&mut self, i: usize) {
        self.m[i] = 0.0;
        if !self.v.is_empty() {
            self.v[i] = 0.0;
        }
    }
}

/// Masked first-order optimizer. Only active input and recurrent entries
/// move; the readout is dense.
#[derive(Clone, Debug)]
pub struct Optimizer {
    config: OptimizerConfig,
    steps: u64,
    w_in: Moments,
    w_rec: Moments,
    w_out: Moments,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig, params: &NetworkParams) -> Self {
        let second = matches!(config, OptimizerConfig::Adam { .. });
        Optimizer {
            config,
            steps: 0,
            w_in: Moments::new(params.w_in.len(), second),
            w_rec: Moments::new(params.w_rec.len(), second),
            w_out: Moments::new(params.w_out.len(), second),
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step(&mut self, params: &mut NetworkParams, grads: &Gradients) {
        self.steps += 1;
        let config = self.config.clone();
        let t = self.steps as i32;
        let update = |w: &mut [f64], g: &[f64], state: &mut Moments, active: &dyn Fn(usize) -> bool| match config {
            OptimizerConfig::Adam { lr, beta1, beta2, eps } => {
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for i in 0..w.len() {
                    if !active(i) {
                        continue;
                    }
                    let m = beta1 * state.m[i] + (1.0 - beta1) * g[i];
                    let v = beta2 * state.v[i] + (1.0 - beta2) * g[i] * g[i];
                    state.m[i] = m;
                    state.v[i] = v;
                    w[i] -= lr * (m / c1) / ((v / c2).sqrt() + eps);
                }
            }
            OptimizerConfig::Sgd { lr, momentum } => {
                for i in 0..w.len() {
                    if !active(i) {
                        continue;
                    }
                    let m = momentum * state.m[i] + g[i];
                    state.m[i] = m;
                    w[i] -= lr * m;
                }
            }
        };
        let in_mask = &params.in_mask;
        update(&mut params.w_in, &grads.w_in, &mut self.w_in, &|i| in_mask.get_flat(i));
        let rec_mask = &params.rec_mask;
        update(&mut params.w_rec, &grads.w_rec, &mut self.w_rec, &|i| rec_mask.get_flat(i));
        update(&mut params.w_out, &grads.w_out, &mut self.w_out, &|_| true);
    }

    /// Forgets the moment estimates of the given flat `w_rec` entries, used
    /// when a connection is pruned or regrown.
    pub fn reset_recurrent(&mut self, entries: impl IntoIterator<Item = usize>) {
        for i in entries {
            self.w_rec.reset(i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::Mask;

    #[test]
    fn inactive_entries_never_move() {
        let mut p = NetworkParams::zeros(Mask::from_pairs(2, [(0, 0)]).unwrap(), 2);
        p.rec_mask.insert(0, 1);
        p.w_rec[1] = 0.3;
        let mut grads = Gradients::zeros_like(&p);
        grads.w_in.fill(1.0);
        grads.w_rec.fill(1.0);
        grads.w_out.fill(1.0);
        for config in [OptimizerConfig::default(), OptimizerConfig::Sgd { lr: 0.1, momentum: 0.9 }] {
            let mut q = p.clone();
            let mut opt = Optimizer::new(config, &q);
            for _ in 0..10 {
                opt.step(&mut q, &grads);
            }
            assert_eq!(&q.w_in[1..], &[0.0; 3]);
            assert_ne!(q.w_in[0], 0.0);
            assert_eq!((q.w_rec[0], q.w_rec[2], q.w_rec[3]), (0.0, 0.0, 0.0));
            assert!(q.w_rec[1] < 0.3);
            assert!(q.w_out.iter().all(|&w| w < 0.0));
        }
    }

    #[test]
    fn first_adam_step_is_lr_sized() {
        let mut p = NetworkParams::zeros(Mask::new(1, 1), 1);
        let mut grads = Gradients::zeros_like(&p);
        grads.w_out[0] = 123.0;
        let mut opt = Optimizer::new(OptimizerConfig::default(), &p);
        opt.step(&mut p, &grads);
        assert!((p.w_out[0] + 1e-3).abs() < 1e-9);
    }
}
