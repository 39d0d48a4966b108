//! Independent reference implementations used by the acceptance suite.

use coconet::nn::NetworkParams;
use coconet::Image;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Mean squared error of a tanh/sigmoid stack evaluated neuron by neuron.
pub fn reference_loss(params: &NetworkParams, inputs: &[f64], targets: &[f64]) -> f64 {
    let arch = params.arch();
    let n = inputs.len() / arch.input_dim;
    let layers = params.layers();
    let mut total = 0.0;
    for s in 0..n {
        let mut act = inputs[s * arch.input_dim..(s + 1) * arch.input_dim].to_vec();
        for (li, layer) in layers.iter().enumerate() {
            let last = li + 1 == layers.len();
            act = (0..layer.fan_out)
                .map(|o| {
                    let z = layer.biases[o]
                        + (0..layer.fan_in)
                            .map(|i| layer.weights[o * layer.fan_in + i] * act[i])
                            .sum::<f64>();
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

/// Central-difference gradient of [`reference_loss`] for every parameter.
pub fn numeric_gradient(params: &NetworkParams, inputs: &[f64], targets: &[f64], step: f64) -> Vec<f64> {
    let mut probe = params.clone();
    let count = params.values().count();
    (0..count)
        .map(|k| {
            let original = *probe.values().nth(k).unwrap();
            *probe.values_mut().nth(k).unwrap() = original + step;
            let up = reference_loss(&probe, inputs, targets);
            *probe.values_mut().nth(k).unwrap() = original - step;
            let down = reference_loss(&probe, inputs, targets);
            *probe.values_mut().nth(k).unwrap() = original;
            (up - down) / (2.0 * step)
        })
        .collect()
}

pub fn direct_psnr(a: &Image, b: &Image) -> f64 {
    let n = a.as_slice().len() as f64;
    let mse = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n;
    10.0 * (1.0 / mse).log10()
}

/// SSIM summed window by window with a 2D 11x11 Gaussian (sigma 1.5),
/// valid positions only, averaged over positions and channels.
pub fn direct_ssim(a: &Image, b: &Image) -> f64 {
    let (h, w) = a.dims();
    let mut weights = [[0.0f64; 11]; 11];
    for (u, row) in weights.iter_mut().enumerate() {
        for (v, x) in row.iter_mut().enumerate() {
            let (du, dv) = (u as f64 - 5.0, v as f64 - 5.0);
            *x = (-(du * du + dv * dv) / 4.5).exp();
        }
    }
    let norm: f64 = weights.iter().flatten().sum();
    let taps: Vec<(usize, usize, f64)> = (0..11)
        .flat_map(|u| (0..11).map(move |v| (u, v)))
        .map(|(u, v)| (u, v, weights[u][v] / norm))
        .collect();
    let (c1, c2) = (0.0001, 0.0009);
    let (mut sum, mut count) = (0.0, 0);
    for ch in 0..3 {
        for top in 0..=h - 11 {
            for left in 0..=w - 11 {
                let at = |img: &Image, u: usize, v: usize| img.pixel(top + u, left + v)[ch];
                let (mut mx, mut my) = (0.0, 0.0);
                for &(u, v, wt) in &taps {
                    mx += wt * at(a, u, v);
                    my += wt * at(b, u, v);
                }
                let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
                for &(u, v, wt) in &taps {
                    let (dx, dy) = (at(a, u, v) - mx, at(b, u, v) - my);
                    vx += wt * dx * dx;
                    vy += wt * dy * dy;
                    cov += wt * dx * dy;
                }
                sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                    / ((mx * mx + my * my + c1) * (vx + vy + c2));
                count += 1;
            }
        }
    }
    sum / count as f64
}
