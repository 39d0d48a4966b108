//! Analytic gradients against central finite differences computed with an
//! independent forward pass.

use coconet::nn::{NetworkArch, NetworkParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;
const MAX_REL_ERR: f64 = 1e-4;
/// Below this magnitude entries are compared absolutely.
const FLOOR: f64 = 1e-6;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Mean squared error of a tanh/sigmoid stack, written out neuron by neuron.
fn reference_loss(params: &NetworkParams, inputs: &[f64], targets: &[f64]) -> f64 {
    let arch = params.arch();
    let n = inputs.len() / arch.input_dim;
    let layers = params.layers();
    let mut total = 0.0;
    for s in 0..n {
        let mut act: Vec<f64> = inputs[s * arch.input_dim..(s + 1) * arch.input_dim].to_vec();
        for (li, layer) in layers.iter().enumerate() {
            let last = li + 1 == layers.len();
            act = (0..layer.fan_out)
                .map(|o| {
                    let row = &layer.weights[o * layer.fan_in..(o + 1) * layer.fan_in];
                    let z = layer.biases[o] + row.iter().zip(&act).map(|(w, a)| w * a).sum::<f64>();
                    if last {
                        sigmoid(z)
                    } else {
                        z.tanh()
                    }
                })
                .collect();
        }
        for (o, t) in act.iter().zip(&targets[s * arch.output_dim..]) {
            total += (o - t) * (o - t);
        }
    }
    total / (n * arch.output_dim) as f64
}

/// Largest relative deviation between analytic and numeric gradients.
fn max_relative_error(params: &NetworkParams, inputs: &[f64], targets: &[f64]) -> f64 {
    let (loss, grads) = params.backward(inputs, targets).unwrap();
    assert!((loss - reference_loss(params, inputs, targets)).abs() < 1e-12);
    let analytic: Vec<f64> = grads.values().copied().collect();
    let mut probe = params.clone();
    let mut worst: f64 = 0.0;
    for (k, &a) in analytic.iter().enumerate() {
        let original = *probe.values().nth(k).unwrap();
        *probe.values_mut().nth(k).unwrap() = original + STEP;
        let up = reference_loss(&probe, inputs, targets);
        *probe.values_mut().nth(k).unwrap() = original - STEP;
        let down = reference_loss(&probe, inputs, targets);
        *probe.values_mut().nth(k).unwrap() = original;
        let numeric = (up - down) / (2.0 * STEP);
        let scale = a.abs().max(numeric.abs()).max(FLOOR);
        worst = worst.max((a - numeric).abs() / scale);
    }
    worst
}

fn random_case(seed: u64) -> (NetworkParams, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = rng.random_range(0..=2);
    let widths: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=8)).collect();
    let arch = NetworkArch::coconet(widths);
    let mut params = NetworkParams::init(arch, seed).unwrap();
    // nonzero biases so their gradients are exercised away from the init point
    for layer in params.layers_mut() {
        for b in &mut layer.biases {
            *b = rng.random_range(-0.5..0.5);
        }
    }
    let batch = rng.random_range(1..=16);
    let inputs = (0..batch * 6).map(|_| rng.random()).collect();
    let targets = (0..batch * 3).map(|_| rng.random()).collect();
    (params, inputs, targets)
}

#[test]
fn twenty_five_random_networks() {
    for seed in 0..25 {
        let (params, inputs, targets) = random_case(seed);
        let err = max_relative_error(&params, &inputs, &targets);
        assert!(err < MAX_REL_ERR, "seed {seed}: relative error {err:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradients_match_finite_differences(seed in any::<u64>()) {
        let (params, inputs, targets) = random_case(seed);
        let err = max_relative_error(&params, &inputs, &targets);
        prop_assert!(err < MAX_REL_ERR, "relative error {err:e}");
    }
}
