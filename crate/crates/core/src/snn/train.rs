use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::network::argmax;
use super::{evaluate, softmax_cross_entropy, Gradients, LifParams, Network, NetworkParams, Optimizer, OptimizerConfig, SpikeRaster};
use crate::error::{Error, Result};
use crate::rewire::{l1_loss_term, rewire_epoch, RewireEvent, RewireMode, RewireState};
use crate::router::check_mappable;
use crate::seed::{derive_seed, rng_for};
use crate::topology::{InputProjection, Placement, TileLattice};

/// Labelled inputs ready for simulation.
#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub inputs: Vec<SpikeRaster>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    /// Map the network every this many epochs (and after the last one);
    /// 0 maps only at the end.
    pub map_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 100, batch_size: 32, optimizer: OptimizerConfig::default(), map_every: 10 }
    }
}

/// Fabric the network is checked against during training.
#[derive(Clone, Copy)]
pub struct MappingCheck<'a> {
    pub placement: &'a Placement,
    pub lattice: &'a TileLattice,
    pub inputs: &'a InputProjection,
}

/// One row of the training log. Epoch 0 is the evaluation before training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub test_loss: f64,
    pub test_accuracy: f64,
    pub l1: f64,
    pub active: usize,
    /// Active connections per rewiring group, `;`-separated.
    pub counts: String,
    /// Every group on budget and no weight outside the mask.
    pub on_budget: bool,
    pub pruned: usize,
    pub regrown: usize,
    /// Mean spikes per neuron per test sample.
    pub spike_rate: f64,
    pub mappable: Option<bool>,
    pub memory_count: Option<usize>,
    pub peak_nt_fanin: Option<usize>,
    pub peak_rt_load: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub records: Vec<EpochRecord>,
    pub events: Vec<RewireEvent>,
}

impl TrainingLog {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let err = |e| crate::router::csv_error(path, e);
        let mut w = csv::Writer::from_path(path).map_err(err)?;
        for r in &self.records {
            w.serialize(r).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Vec<EpochRecord>> {
        let err = |e| crate::router::csv_error(path, e);
        let mut r = csv::Reader::from_path(path).map_err(err)?;
        r.deserialize().map(|row| row.map_err(err)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrainStatus {
    Completed,
    /// Training stopped; the returned parameters are those at the start of
    /// the failing epoch.
    Diverged { epoch: usize, message: String },
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: NetworkParams,
    pub log: TrainingLog,
    pub status: TrainStatus,
}

const SHUFFLE_STREAM: u64 = 1 << 32;
const REWIRE_STREAM: u64 = 2 << 32;

/// Minibatch training with one rewiring step after every epoch.
#[allow(clippy::too_many_arguments)]
pub fn train(
    params: NetworkParams,
    state: &RewireState,
    train_set: &Dataset,
    test_set: &Dataset,
    lif: &LifParams,
    config: &TrainConfig,
    mapping: Option<MappingCheck>,
    seed: u64,
) -> Result<TrainOutcome> {
    train_observed(params, state, train_set, test_set, lif, config, mapping, seed, &mut |_, _| {})
}

/// [`train`], calling `observer(epoch, params)` at every epoch boundary,
/// starting with the initial parameters as epoch 0.
#[allow(clippy::too_many_arguments)]
pub fn train_observed(
    mut params: NetworkParams,
    state: &RewireState,
    train_set: &Dataset,
    test_set: &Dataset,
    lif: &LifParams,
    config: &TrainConfig,
    mapping: Option<MappingCheck>,
    seed: u64,
    observer: &mut dyn FnMut(usize, &NetworkParams),
) -> Result<TrainOutcome> {
    lif.validate()?;
    config.optimizer.validate()?;
    if config.batch_size == 0 {
        return Err(Error::Config("batch_size must be >= 1".into()));
    }
    let mut optimizer = Optimizer::new(config.optimizer.clone(), &params);
    let mut grads = Gradients::zeros_like(&params);
    let mut log = TrainingLog::default();

    let first = {
        let net = Network::new(&params, lif);
        let train_eval = evaluate(&net, &train_set.inputs, &train_set.labels)?;
        (train_eval.loss, train_eval.accuracy)
    };
    let map_now = |epoch: usize| {
        epoch == config.epochs || (config.map_every > 0 && epoch % config.map_every == 0)
    };
    let record = |params: &NetworkParams, epoch, train: (f64, f64), event: Option<&RewireEvent>| -> Result<EpochRecord> {
        let net = Network::new(params, lif);
        let test = evaluate(&net, &test_set.inputs, &test_set.labels)?;
        let counts = state.counts(&params.rec_mask);
        let on_budget = params.check_consistency().is_ok()
            && counts.as_ref().is_ok_and(|c| c.as_slice() == state.targets());
        let mut r = EpochRecord {
            epoch,
            train_loss: train.0,
            train_accuracy: train.1,
            test_loss: test.loss,
            test_accuracy: test.accuracy,
            l1: l1_loss_term(params, state.lambda_l1),
            active: params.rec_mask.count(),
            counts: counts
                .map(|c| c.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";"))
                .unwrap_or_default(),
            on_budget,
            pruned: event.map_or(0, |e| e.pruned.iter().sum()),
            regrown: event.map_or(0, |e| e.regrown.iter().sum()),
            spike_rate: if test_set.is_empty() {
                0.0
            } else {
                test.spike_counts.iter().sum::<f64>() / (params.n_neurons * test_set.len()) as f64
            },
            mappable: None,
            memory_count: None,
            peak_nt_fanin: None,
            peak_rt_load: None,
        };
        if let Some(m) = mapping.filter(|_| map_now(epoch)) {
            let report = check_mappable(&params.rec_mask, m.placement, m.lattice, m.inputs)?;
            r.mappable = Some(report.mappable);
            r.memory_count = Some(report.memory_count);
            r.peak_nt_fanin = Some(report.peak_nt_fanin);
            r.peak_rt_load = Some(report.peak_rt_load);
        }
        Ok(r)
    };
    log.records.push(record(&params, 0, first, None)?);
    observer(0, &params);

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=config.epochs {
        let checkpoint = params.clone();
        let diverged = |message: String, log: TrainingLog| TrainOutcome {
            params: checkpoint.clone(),
            log,
            status: TrainStatus::Diverged { epoch, message },
        };
        order.shuffle(&mut rng_for(seed, SHUFFLE_STREAM + epoch as u64));
        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for batch in order.chunks(config.batch_size) {
            grads.clear();
            let scale = 1.0 / batch.len() as f64;
            {
                let net = Network::new(&params, lif);
                for &i in batch {
                    let x = &train_set.inputs[i];
                    let trace = match net.run(x) {
                        Ok(t) => t,
                        Err(Error::Numerical { step, msg, .. }) => {
                            return Ok(diverged(format!("step {step}: {msg}"), log));
                        }
                        Err(e) => return Err(e),
                    };
                    let label = train_set.labels[i];
                    let (l, mut dz) = softmax_cross_entropy(&trace.logits, label);
                    loss_sum += l;
                    correct += (argmax(&trace.logits) == label) as usize;
                    dz.iter_mut().for_each(|g| *g *= scale);
                    net.backward(x, &trace, &dz, &mut grads);
                }
            }
            if state.lambda_l1 > 0.0 {
                let n = params.n_neurons;
                for (i, j) in params.rec_mask.iter() {
                    grads.w_rec[i * n + j] += state.lambda_l1 * params.w_rec[i * n + j].signum();
                }
            }
            if !loss_sum.is_finite() || grads.w_rec.iter().chain(&grads.w_in).chain(&grads.w_out).any(|g| !g.is_finite()) {
                return Ok(diverged("non-finite loss or gradient".into(), log));
            }
            optimizer.step(&mut params, &grads);
        }
        let event = rewire_epoch(&mut params, state, epoch, derive_seed(seed, REWIRE_STREAM + epoch as u64))?;
        optimizer.reset_recurrent(event.changed.iter().copied());
        let n = train_set.len().max(1) as f64;
        let l1 = l1_loss_term(&params, state.lambda_l1);
        let train_metrics = (loss_sum / n + l1, correct as f64 / n);
        match record(&params, epoch, train_metrics, Some(&event)) {
            Ok(r) => log.records.push(r),
            Err(Error::Numerical { step, msg, .. }) => {
                return Ok(diverged(format!("evaluation step {step}: {msg}"), log));
            }
            Err(e) => return Err(e),
        }
        observer(epoch, &params);
        if state.mode() != RewireMode::L1Baseline {
            log.events.push(event);
        }
    }
    Ok(TrainOutcome { params, log, status: TrainStatus::Completed })
}
