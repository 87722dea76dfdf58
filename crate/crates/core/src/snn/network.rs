use super::{surrogate_grad, LifParams, NetworkParams};
use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::rewire::l1_loss_term;

/// Binned input of one sample, stored sparsely: the non-zero channels of
/// each time step.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikeRaster {
    n_steps: usize,
    n_channels: usize,
    offsets: Vec<u32>,
    channels: Vec<u32>,
    values: Vec<f32>,
}

impl SpikeRaster {
    /// From a dense row-major `[n_steps, n_channels]` tensor.
    pub fn from_dense(n_steps: usize, n_channels: usize, dense: &[f32]) -> Self {
        assert_eq!(dense.len(), n_steps * n_channels, "dense raster has the wrong length");
        let mut offsets = Vec::with_capacity(n_steps + 1);
        let (mut channels, mut values) = (Vec::new(), Vec::new());
        offsets.push(0);
        for row in dense.chunks(n_channels.max(1)).take(n_steps) {
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    channels.push(c as u32);
                    values.push(v);
                }
            }
            offsets.push(channels.len() as u32);
        }
        offsets.resize(n_steps + 1, channels.len() as u32);
        SpikeRaster { n_steps, n_channels, offsets, channels, values }
    }

    pub fn to_dense(&self) -> Vec<f32> {
        let mut dense = vec![0.0; self.n_steps * self.n_channels];
        for t in 0..self.n_steps {
            for (c, v) in self.events(t) {
                dense[t * self.n_channels + c] = v as f32;
            }
        }
        dense
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    /// Non-zero `(channel, value)` entries of step `t`.
    #[inline]
    pub fn events(&self, t: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.offsets[t] as usize, self.offsets[t + 1] as usize);
        self.channels[a..b].iter().zip(&self.values[a..b]).map(|(&c, &v)| (c as usize, v as f64))
    }
}

/// Dense input batch laid out `[time, batch, channels]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikeTensor {
    pub n_steps: usize,
    pub batch: usize,
    pub n_channels: usize,
    pub data: Vec<f32>,
}

impl SpikeTensor {
    pub fn zeros(n_steps: usize, batch: usize, n_channels: usize) -> Self {
        SpikeTensor { n_steps, batch, n_channels, data: vec![0.0; n_steps * batch * n_channels] }
    }

    #[inline]
    pub fn index(&self, t: usize, b: usize, c: usize) -> usize {
        (t * self.batch + b) * self.n_channels + c
    }

    pub fn sample(&self, b: usize) -> SpikeRaster {
        let mut dense = Vec::with_capacity(self.n_steps * self.n_channels);
        for t in 0..self.n_steps {
            let start = self.index(t, b, 0);
            dense.extend_from_slice(&self.data[start..start + self.n_channels]);
        }
        SpikeRaster::from_dense(self.n_steps, self.n_channels, &dense)
    }
}

/// How a membrane potential becomes a spike on the forward pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SpikeMode {
    /// `H(v - θ)`, the real network.
    #[default]
    Heaviside,
    /// `0.5 + x / (1 + β|x|)`, whose exact derivative is the surrogate. Makes
    /// the network differentiable so gradients can be checked by finite
    /// differences. Refractoriness is ignored in this mode.
    Smooth,
}

/// Active columns of each mask row.
#[derive(Clone, Debug)]
struct Csr {
    ptr: Vec<usize>,
    idx: Vec<u32>,
}

impl Csr {
    fn from_mask(mask: &Mask) -> Self {
        let mut ptr = Vec::with_capacity(mask.rows() + 1);
        let mut idx = Vec::with_capacity(mask.count());
        ptr.push(0);
        for r in 0..mask.rows() {
            idx.extend(mask.row(r).map(|j| j as u32));
            ptr.push(idx.len());
        }
        Csr { ptr, idx }
    }

    #[inline]
    fn row(&self, r: usize) -> &[u32] {
        &self.idx[self.ptr[r]..self.ptr[r + 1]]
    }
}

/// Recorded state of one forward pass.
#[derive(Clone, Debug)]
pub struct Trace {
    pub n_steps: usize,
    pub n_neurons: usize,
    pub n_classes: usize,
    /// `v[t]` for `t = 0..=T`.
    pub v: Vec<f64>,
    /// `s[t]` for `t = 0..T`.
    pub s: Vec<f64>,
    /// 0 while refractory, else 1; empty when refractoriness is off.
    gate: Vec<f64>,
    /// `y[t]` for `t = 0..=T`.
    pub y: Vec<f64>,
    pub logits: Vec<f64>,
}

impl Trace {
    pub fn membrane(&self, t: usize) -> &[f64] {
        &self.v[t * self.n_neurons..(t + 1) * self.n_neurons]
    }

    pub fn spikes(&self, t: usize) -> &[f64] {
        &self.s[t * self.n_neurons..(t + 1) * self.n_neurons]
    }

    pub fn readout(&self, t: usize) -> &[f64] {
        &self.y[t * self.n_classes..(t + 1) * self.n_classes]
    }

    pub fn spike_counts(&self) -> Vec<f64> {
        let mut counts = vec![0.0; self.n_neurons];
        for row in self.s.chunks(self.n_neurons) {
            for (c, s) in counts.iter_mut().zip(row) {
                *c += s;
            }
        }
        counts
    }
}

/// Gradients with the same layout as [`NetworkParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub w_in: Vec<f64>,
    pub w_rec: Vec<f64>,
    pub w_out: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(p: &NetworkParams) -> Self {
        Gradients { w_in: vec![0.0; p.w_in.len()], w_rec: vec![0.0; p.w_rec.len()], w_out: vec![0.0; p.w_out.len()] }
    }

    pub fn clear(&mut self) {
        self.w_in.fill(0.0);
        self.w_rec.fill(0.0);
        self.w_out.fill(0.0);
    }
}

/// A parameter set prepared for simulation.
pub struct Network<'a> {
    params: &'a NetworkParams,
    lif: &'a LifParams,
    mode: SpikeMode,
    rec: Csr,
    inp: Csr,
}

impl<'a> Network<'a> {
    pub fn new(params: &'a NetworkParams, lif: &'a LifParams) -> Self {
        Network {
            params,
            lif,
            mode: SpikeMode::Heaviside,
            rec: Csr::from_mask(&params.rec_mask),
            inp: Csr::from_mask(&params.in_mask),
        }
    }

    pub fn with_mode(mut self, mode: SpikeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn params(&self) -> &NetworkParams {
        self.params
    }

    fn uses_gate(&self) -> bool {
        self.mode == SpikeMode::Heaviside && self.lif.refractory > 0
    }

    pub fn run(&self, x: &SpikeRaster) -> Result<Trace> {
        let p = self.params;
        let (n, k, steps) = (p.n_neurons, p.n_classes, x.n_steps());
        if x.n_channels() != p.n_inputs {
            return Err(Error::Domain(format!(
                "input has {} channels, network expects {}",
                x.n_channels(),
                p.n_inputs
            )));
        }
        let lif = self.lif;
        let (alpha, beta, kappa) = (lif.alpha(), lif.beta_syn(), lif.kappa());
        let (theta, v_reset, sb) = (lif.v_threshold, lif.v_reset, lif.surrogate_beta);
        let gated = self.uses_gate();

        let mut v = vec![0.0; (steps + 1) * n];
        let mut s = vec![0.0; steps * n];
        let mut gate = if gated { vec![0.0; steps * n] } else { Vec::new() };
        let mut y = vec![0.0; (steps + 1) * k];
        let mut cur = vec![0.0; n];
        let mut h = vec![0.0; n];
        let mut refractory = vec![0usize; n];

        for t in 0..steps {
            let (v_past, v_future) = v.split_at_mut((t + 1) * n);
            let vt = &v_past[t * n..];
            let v_next = &mut v_future[..n];
            let st = &mut s[t * n..(t + 1) * n];
            for j in 0..n {
                let xj = vt[j] - theta;
                st[j] = match self.mode {
                    SpikeMode::Heaviside => (xj >= 0.0) as u8 as f64,
                    SpikeMode::Smooth => 0.5 + xj / (1.0 + sb * xj.abs()),
                };
                if gated {
                    let open = refractory[j] == 0;
                    gate[t * n + j] = open as u8 as f64;
                    if open {
                        if st[j] != 0.0 {
                            refractory[j] = lif.refractory;
                        }
                    } else {
                        st[j] = 0.0;
                        refractory[j] -= 1;
                    }
                }
            }

            h.fill(0.0);
            for (c, val) in x.events(t) {
                let w = &p.w_in[c * n..(c + 1) * n];
                for &j in self.inp.row(c) {
                    h[j as usize] += w[j as usize] * val;
                }
            }
            let (yt, y_next) = y[t * k..(t + 2) * k].split_at_mut(k);
            y_next.copy_from_slice(yt);
            y_next.iter_mut().for_each(|v| *v *= kappa);
            for m in 0..n {
                let sm = st[m];
                if sm == 0.0 {
                    continue;
                }
                let w = &p.w_rec[m * n..(m + 1) * n];
                for &j in self.rec.row(m) {
                    h[j as usize] += w[j as usize] * sm;
                }
                let wo = &p.w_out[m * k..(m + 1) * k];
                for c in 0..k {
                    y_next[c] += (1.0 - kappa) * wo[c] * sm;
                }
            }

            let mut total = 0.0;
            for j in 0..n {
                cur[j] = beta * cur[j] + h[j];
                v_next[j] = alpha * (vt[j] * (1.0 - st[j]) + v_reset * st[j]) + (1.0 - alpha) * cur[j];
                total += v_next[j];
            }
            if !total.is_finite() {
                return Err(Error::Numerical { epoch: 0, step: t, msg: "non-finite membrane potential".into() });
            }
        }

        let mut logits = vec![0.0; k];
        for t in 1..=steps {
            for c in 0..k {
                logits[c] += y[t * k + c];
            }
        }
        if logits.iter().any(|z| !z.is_finite()) {
            return Err(Error::Numerical { epoch: 0, step: steps, msg: "non-finite logits".into() });
        }
        Ok(Trace { n_steps: steps, n_neurons: n, n_classes: k, v, s, gate, y, logits })
    }

    /// Backpropagation through time for one sample. `dz` is the loss
    /// gradient with respect to the logits; the parameter gradients are
    /// added to `grads`.
    pub fn backward(&self, x: &SpikeRaster, trace: &Trace, dz: &[f64], grads: &mut Gradients) {
        let p = self.params;
        let (n, k, steps) = (p.n_neurons, p.n_classes, trace.n_steps);
        let lif = self.lif;
        let (alpha, beta, kappa) = (lif.alpha(), lif.beta_syn(), lif.kappa());
        let (theta, v_reset, sb) = (lif.v_threshold, lif.v_reset, lif.surrogate_beta);
        let gated = self.uses_gate();

        let mut gv_next = vec![0.0; n];
        let mut gv = vec![0.0; n];
        let mut gi_next = vec![0.0; n];
        let mut gi = vec![0.0; n];
        // dL/dy[t + 1], starting at t + 1 = T.
        let mut gy = dz.to_vec();
        let mut gy_out = vec![0.0; k];

        for t in (0..steps).rev() {
            for j in 0..n {
                gi[j] = (1.0 - alpha) * gv_next[j] + beta * gi_next[j];
            }
            for (c, val) in x.events(t) {
                let g = &mut grads.w_in[c * n..(c + 1) * n];
                for &j in self.inp.row(c) {
                    g[j as usize] += val * gi[j as usize];
                }
            }
            for c in 0..k {
                gy_out[c] = (1.0 - kappa) * gy[c];
            }
            let vt = trace.membrane(t);
            let st = trace.spikes(t);
            for m in 0..n {
                let sm = st[m];
                let w = &p.w_rec[m * n..(m + 1) * n];
                let wo = &p.w_out[m * k..(m + 1) * k];
                let mut gs = alpha * (v_reset - vt[m]) * gv_next[m];
                for c in 0..k {
                    gs += wo[c] * gy_out[c];
                }
                let row = self.rec.row(m);
                for &j in row {
                    gs += w[j as usize] * gi[j as usize];
                }
                if sm != 0.0 {
                    let g = &mut grads.w_rec[m * n..(m + 1) * n];
                    for &j in row {
                        g[j as usize] += sm * gi[j as usize];
                    }
                    let go = &mut grads.w_out[m * k..(m + 1) * k];
                    for c in 0..k {
                        go[c] += sm * gy_out[c];
                    }
                }
                let g = if gated { trace.gate[t * n + m] } else { 1.0 };
                gv[m] = alpha * (1.0 - sm) * gv_next[m] + gs * g * surrogate_grad(vt[m] - theta, sb);
            }
            std::mem::swap(&mut gv, &mut gv_next);
            std::mem::swap(&mut gi, &mut gi_next);
            for c in 0..k {
                gy[c] = dz[c] + kappa * gy[c];
            }
        }
    }
}

/// Softmax cross-entropy of one sample and its gradient in the logits.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    let loss = sum.ln() - (logits[label] - max);
    let grad = exp
        .iter()
        .enumerate()
        .map(|(c, e)| e / sum - (c == label) as u8 as f64)
        .collect();
    (loss, grad)
}

/// Mean cross-entropy over a batch plus the L1 penalty on recurrent weights.
pub fn loss(logits: &[Vec<f64>], labels: &[usize], params: &NetworkParams, lambda_l1: f64) -> f64 {
    assert_eq!(logits.len(), labels.len());
    if logits.is_empty() {
        return l1_loss_term(params, lambda_l1);
    }
    let ce: f64 = logits.iter().zip(labels).map(|(z, &y)| softmax_cross_entropy(z, y).0).sum();
    ce / logits.len() as f64 + l1_loss_term(params, lambda_l1)
}

/// Outputs of [`lif_forward`], all laid out time-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardOutput {
    pub n_steps: usize,
    pub batch: usize,
    /// `[time, batch, neurons]`.
    pub spikes: Vec<f64>,
    /// Readout `y[t + 1]` after step `t`, `[time, batch, classes]`.
    pub readout: Vec<f64>,
    /// Time-summed readout per sample.
    pub logits: Vec<Vec<f64>>,
}

/// Runs a dense `[time, batch, channels]` batch.
pub fn lif_forward(params: &NetworkParams, lif: &LifParams, inputs: &SpikeTensor) -> Result<ForwardOutput> {
    let net = Network::new(params, lif);
    let (n, k, steps, batch) = (params.n_neurons, params.n_classes, inputs.n_steps, inputs.batch);
    let mut out = ForwardOutput {
        n_steps: steps,
        batch,
        spikes: vec![0.0; steps * batch * n],
        readout: vec![0.0; steps * batch * k],
        logits: Vec::with_capacity(batch),
    };
    for b in 0..batch {
        let trace = net.run(&inputs.sample(b))?;
        for t in 0..steps {
            let at = (t * batch + b) * n;
            out.spikes[at..at + n].copy_from_slice(trace.spikes(t));
            let at = (t * batch + b) * k;
            out.readout[at..at + k].copy_from_slice(trace.readout(t + 1));
        }
        out.logits.push(trace.logits);
    }
    Ok(out)
}

/// Forward-only evaluation of a labelled set.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchResult {
    pub logits: Vec<Vec<f64>>,
    /// Spikes per neuron summed over the batch.
    pub spike_counts: Vec<f64>,
    /// Mean cross-entropy (no regulariser).
    pub loss: f64,
    pub accuracy: f64,
}

pub fn evaluate(net: &Network, inputs: &[SpikeRaster], labels: &[usize]) -> Result<BatchResult> {
    let n = net.params().n_neurons;
    let mut result = BatchResult { logits: Vec::new(), spike_counts: vec![0.0; n], loss: 0.0, accuracy: 0.0 };
    let mut correct = 0;
    for (x, &label) in inputs.iter().zip(labels) {
        let trace = net.run(x)?;
        for (a, b) in result.spike_counts.iter_mut().zip(trace.spike_counts()) {
            *a += b;
        }
        result.loss += softmax_cross_entropy(&trace.logits, label).0;
        correct += (argmax(&trace.logits) == label) as usize;
        result.logits.push(trace.logits);
    }
    if !inputs.is_empty() {
        result.loss /= inputs.len() as f64;
        result.accuracy = correct as f64 / inputs.len() as f64;
    }
    Ok(result)
}

/// Index of the largest entry; the first one on ties.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_neuron(w_in: f64) -> NetworkParams {
        let mut p = NetworkParams::zeros(Mask::from_pairs(1, [(0, 0)]).unwrap(), 1);
        p.w_in[0] = w_in;
        p
    }

    #[test]
    fn raster_round_trip() {
        let dense = vec![0.0, 1.0, 0.0, 0.5, 0.0, 0.0];
        let r = SpikeRaster::from_dense(3, 2, &dense);
        assert_eq!(r.to_dense(), dense);
        assert_eq!(r.events(0).collect::<Vec<_>>(), vec![(1, 1.0)]);
        assert_eq!(r.events(2).count(), 0);
    }

    #[test]
    fn zero_input_is_silent() {
        let p = NetworkParams::zeros(Mask::new(3, 4), 2);
        let lif = LifParams::default();
        let out = lif_forward(&p, &lif, &SpikeTensor::zeros(20, 2, 3)).unwrap();
        assert!(out.spikes.iter().all(|&s| s == 0.0));
        assert!(out.readout.iter().all(|&y| y == 0.0));
    }

    #[test]
    fn single_input_spike_follows_kernel() {
        let lif = LifParams { v_threshold: 10.0, ..LifParams::default() };
        let p = single_neuron(1.0);
        let mut x = vec![0.0; 6];
        x[0] = 1.0;
        let trace = Network::new(&p, &lif).run(&SpikeRaster::from_dense(6, 1, &x)).unwrap();
        let a = lif.alpha();
        for t in 1..=6 {
            let expected = (1.0 - a) * a.powi(t as i32 - 1);
            assert!((trace.membrane(t)[0] - expected).abs() < 1e-15, "t = {t}");
        }
    }

    #[test]
    fn constant_drive_spikes_periodically() {
        let lif = LifParams::default();
        let drive = 2.5;
        let p = single_neuron(drive);
        let steps = 60;
        let trace = Network::new(&p, &lif).run(&SpikeRaster::from_dense(steps, 1, &vec![1.0; steps])).unwrap();
        // v[k] = I (1 - α^k) from rest, and the reset restarts the same trace.
        let a = lif.alpha();
        let period = ((1.0 - lif.v_threshold / drive).ln() / a.ln()).ceil() as usize;
        let times: Vec<usize> = (0..steps).filter(|&t| trace.spikes(t)[0] == 1.0).collect();
        let expected: Vec<usize> = (1..).map(|i| i * period).take_while(|&t| t < steps).collect();
        assert_eq!(times, expected);
    }

    #[test]
    fn refractory_blocks_spikes() {
        let lif = LifParams { refractory: 2, ..LifParams::default() };
        let p = single_neuron(100.0);
        let trace = Network::new(&p, &lif).run(&SpikeRaster::from_dense(10, 1, &vec![1.0; 10])).unwrap();
        let times: Vec<usize> = (0..10).filter(|&t| trace.spikes(t)[0] == 1.0).collect();
        // Drive reaches threshold one step after any reset; two blocked steps follow each spike.
        assert_eq!(times, vec![1, 4, 7]);
    }

    #[test]
    fn decay_is_geometric() {
        let lif = LifParams { v_threshold: 1e9, ..LifParams::default() };
        let p = single_neuron(50.0);
        let mut x = vec![0.0; 30];
        x[0] = 1.0;
        let trace = Network::new(&p, &lif).run(&SpikeRaster::from_dense(30, 1, &x)).unwrap();
        for t in 2..30 {
            let ratio = trace.membrane(t + 1)[0] / trace.membrane(t)[0];
            assert!((ratio - lif.alpha()).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_logits_give_ln_c() {
        let p = NetworkParams::zeros(Mask::new(1, 1), 4);
        let l = loss(&[vec![0.3; 4], vec![0.3; 4]], &[0, 3], &p, 0.5);
        assert!((l - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_gradient_sums_to_zero() {
        let (l, g) = softmax_cross_entropy(&[1.0, -2.0, 0.5], 2);
        assert!(l > 0.0);
        assert!(g.iter().sum::<f64>().abs() < 1e-12);
        assert!(g[2] < 0.0);
    }
}
