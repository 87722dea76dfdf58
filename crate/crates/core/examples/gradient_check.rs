//! Compares hand-derived gradients with central differences on a small
//! network run with the smooth spike function.
//!
//! cargo run --example gradient_check

use mosaic::mask::Mask;
use mosaic::snn::{softmax_cross_entropy, Gradients, LifParams, Network, NetworkParams, SpikeMode, SpikeRaster};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let (n_in, n, k, steps) = (3, 5, 2, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut in_mask = Mask::new(n_in, n);
    for c in 0..n_in {
        for j in 0..n {
            in_mask.insert(c, j);
        }
    }
    let mut params = NetworkParams::zeros(in_mask, k);
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            params.rec_mask.insert(i, j);
            params.w_rec[i * n + j] = rng.random_range(-1.0..1.0);
        }
    }
    params.w_in.iter_mut().for_each(|w| *w = rng.random_range(-2.0..2.0));
    params.w_out.iter_mut().for_each(|w| *w = rng.random_range(-1.0..1.0));
    let dense: Vec<f32> = (0..steps * n_in).map(|_| if rng.random_bool(0.4) { 1.0 } else { 0.0 }).collect();
    let x = SpikeRaster::from_dense(steps, n_in, &dense);
    let lif = LifParams::default();

    let loss = |p: &NetworkParams| {
        let net = Network::new(p, &lif).with_mode(SpikeMode::Smooth);
        softmax_cross_entropy(&net.run(&x).expect("finite").logits, 1).0
    };
    let net = Network::new(&params, &lif).with_mode(SpikeMode::Smooth);
    let trace = net.run(&x).expect("finite");
    let (_, dz) = softmax_cross_entropy(&trace.logits, 1);
    let mut grads = Gradients::zeros_like(&params);
    net.backward(&x, &trace, &dz, &mut grads);

    let eps = 1e-4;
    let mut worst: f64 = 0.0;
    for idx in params.rec_mask.iter().map(|(i, j)| i * n + j) {
        let (mut up, mut down) = (params.clone(), params.clone());
        up.w_rec[idx] += eps;
        down.w_rec[idx] -= eps;
        let numeric = (loss(&up) - loss(&down)) / (2.0 * eps);
        let rel = (numeric - grads.w_rec[idx]).abs() / numeric.abs().max(grads.w_rec[idx].abs()).max(1e-8);
        worst = worst.max(rel);
    }
    println!("{} recurrent weights checked, worst relative error {worst:.2e}", params.rec_mask.count());
}
