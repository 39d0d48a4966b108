//! Dense network engine: tanh hidden layers, a sigmoid output layer, mean
//! squared error, analytic backpropagation and Adam.
//!
//! Only the fixed stack needed for coordinate-to-color regression is
//! supported. Weights are stored row-major with shape `(fan_out, fan_in)`;
//! batched inputs and outputs are flat row-major `(batch, dim)` buffers.

mod adam;
mod gemm;

pub use adam::{adam_step, AdamState};

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use self::gemm::{gemm, MatRef};
use crate::{Error, Result};

/// Layer widths of a dense network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkArch {
    pub input_dim: usize,
    pub hidden_widths: Vec<usize>,
    pub output_dim: usize,
}

impl NetworkArch {
    /// Six coordinate features in.
    pub const COORD_INPUTS: usize = 6;
    /// RGB out.
    pub const COLOR_OUTPUTS: usize = 3;

    /// A coordinate-to-color network with the given hidden widths.
    pub fn coconet(hidden_widths: Vec<usize>) -> Self {
        Self {
            input_dim: Self::COORD_INPUTS,
            hidden_widths,
            output_dim: Self::COLOR_OUTPUTS,
        }
    }

    /// `depth` hidden layers of `width` units each.
    pub fn uniform(depth: usize, width: usize) -> Self {
        Self::coconet(vec![width; depth])
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::invalid("input and output dimensions must be positive"));
        }
        if let Some(i) = self.hidden_widths.iter().position(|&w| w == 0) {
            return Err(Error::invalid(format!("hidden layer {i} has zero width")));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` for each weight layer, input side first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_widths.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden_widths);
        dims.push(self.output_dim);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes()
            .iter()
            .map(|&(fan_in, fan_out)| fan_out * fan_in + fan_out)
            .sum()
    }
}

/// Weights and biases of one affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub fan_in: usize,
    pub fan_out: usize,
    /// Row-major `(fan_out, fan_in)`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl LayerParams {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            fan_in,
            fan_out,
            weights: vec![0.0; fan_in * fan_out],
            biases: vec![0.0; fan_out],
        }
    }

    fn shape_ok(&self) -> bool {
        self.weights.len() == self.fan_in * self.fan_out && self.biases.len() == self.fan_out
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.biases)
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(&mut self.biases)
    }
}

fn zeros_for(arch: &NetworkArch) -> Vec<LayerParams> {
    arch.layer_shapes()
        .into_iter()
        .map(|(fan_in, fan_out)| LayerParams::zeros(fan_in, fan_out))
        .collect()
}

fn shapes_match(a: &[LayerParams], b: &[LayerParams]) -> bool {
    a.len() == b.len()
        && a
            .iter()
            .zip(b)
            .all(|(x, y)| x.fan_in == y.fan_in && x.fan_out == y.fan_out && x.shape_ok() && y.shape_ok())
}

/// Learnable parameters of the whole stack. A trained instance is the
/// encoded form of an image.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    arch: NetworkArch,
    layers: Vec<LayerParams>,
}

impl NetworkParams {
    pub fn zeros(arch: NetworkArch) -> Result<Self> {
        arch.validate()?;
        let layers = zeros_for(&arch);
        Ok(Self { arch, layers })
    }

    /// Glorot-uniform weights `U(-sqrt(6/(fan_in+fan_out)), +sqrt(...))`,
    /// zero biases. Deterministic for a given seed.
    pub fn init(arch: NetworkArch, seed: u64) -> Result<Self> {
        let mut params = Self::zeros(arch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut params.layers {
            let limit = (6.0 / (layer.fan_in + layer.fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite, ordered bounds");
            for w in &mut layer.weights {
                *w = dist.sample(&mut rng);
            }
        }
        Ok(params)
    }

    /// Assembles parameters from explicit layers, checking shapes and finiteness.
    pub fn from_layers(arch: NetworkArch, layers: Vec<LayerParams>) -> Result<Self> {
        arch.validate()?;
        if !shapes_match(&layers, &zeros_for(&arch)) {
            return Err(Error::invalid("layer shapes do not match the architecture"));
        }
        let params = Self { arch, layers };
        if !params.is_finite() {
            return Err(Error::invalid("parameters contain non-finite values"));
        }
        Ok(params)
    }

    pub fn arch(&self) -> &NetworkArch {
        &self.arch
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams] {
        &mut self.layers
    }

    /// All values in storage order: per layer, weights (row-major) then biases.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(LayerParams::values)
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(LayerParams::values_mut)
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    /// Evaluates one sample, keeping every layer's activation for backprop.
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        if input.len() != self.arch.input_dim {
            return Err(Error::invalid(format!(
                "expected {} inputs, got {}",
                self.arch.input_dim,
                input.len()
            )));
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite network input"));
        }
        let mut activations = vec![input.to_vec()];
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let prev = &activations[l];
            let next: Vec<f64> = (0..layer.fan_out)
                .map(|j| {
                    let row = &layer.weights[j * layer.fan_in..(j + 1) * layer.fan_in];
                    let z = layer.biases[j]
                        + row.iter().zip(prev).map(|(w, a)| w * a).sum::<f64>();
                    if l == last {
                        sigmoid(z)
                    } else {
                        z.tanh()
                    }
                })
                .collect();
            activations.push(next);
        }
        let output = activations.last().cloned().unwrap_or_default();
        Ok((output, ForwardCache { activations }))
    }

    /// Evaluates a batch of row-major inputs; returns the `(n, output_dim)` outputs.
    pub fn predict(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let n = self.batch_len(inputs)?;
        let mut ws = Workspace::default();
        self.forward_batch(inputs, n, &mut ws);
        Ok(ws.activations[self.layers.len()].clone())
    }

    /// Mean squared error over the batch and output channels, and its exact gradient.
    pub fn backward(&self, inputs: &[f64], targets: &[f64]) -> Result<(f64, Gradients)> {
        let mut grads = Gradients::zeros_like(self);
        let mut ws = Workspace::default();
        let loss = self.backward_with(inputs, targets, &mut ws, &mut grads)?;
        Ok((loss, grads))
    }

    /// Allocation-reusing form of [`NetworkParams::backward`]; `grads` is overwritten.
    pub fn backward_with(
        &self,
        inputs: &[f64],
        targets: &[f64],
        ws: &mut Workspace,
        grads: &mut Gradients,
    ) -> Result<f64> {
        let n = self.batch_len(inputs)?;
        let out_dim = self.arch.output_dim;
        if targets.len() != n * out_dim {
            return Err(Error::invalid(format!(
                "expected {} target values for {n} samples, got {}",
                n * out_dim,
                targets.len()
            )));
        }
        if !shapes_match(&grads.layers, &self.layers) {
            return Err(Error::invalid("gradient buffer shaped for a different network"));
        }
        self.forward_batch(inputs, n, ws);

        let depth = self.layers.len();
        let scale = 2.0 / (n * out_dim) as f64;
        let mut loss = 0.0;
        {
            let output = &ws.activations[depth];
            let delta = &mut ws.delta;
            delta.clear();
            delta.extend(output.iter().zip(targets).map(|(&o, &t)| {
                let e = o - t;
                loss += e * e;
                scale * e * o * (1.0 - o)
            }));
        }
        loss /= (n * out_dim) as f64;

        for l in (0..depth).rev() {
            let layer = &self.layers[l];
            let grad = &mut grads.layers[l];
            let prev = &ws.activations[l];
            let delta = &ws.delta;
            // dW = delta^T * prev
            gemm(
                1.0,
                MatRef::new(delta, n, layer.fan_out).t(),
                MatRef::new(prev, n, layer.fan_in),
                0.0,
                &mut grad.weights,
            );
            grad.biases.iter_mut().for_each(|b| *b = 0.0);
            for row in delta.chunks_exact(layer.fan_out) {
                for (b, d) in grad.biases.iter_mut().zip(row) {
                    *b += d;
                }
            }
            if l > 0 {
                // delta_prev = (delta * W) ⊙ (1 - a^2)
                ws.delta_prev.clear();
                ws.delta_prev.resize(n * layer.fan_in, 0.0);
                gemm(
                    1.0,
                    MatRef::new(delta, n, layer.fan_out),
                    MatRef::new(&layer.weights, layer.fan_out, layer.fan_in),
                    0.0,
                    &mut ws.delta_prev,
                );
                for (d, a) in ws.delta_prev.iter_mut().zip(prev) {
                    *d *= 1.0 - a * a;
                }
                std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
            }
        }
        Ok(loss)
    }

    fn batch_len(&self, inputs: &[f64]) -> Result<usize> {
        let d = self.arch.input_dim;
        if inputs.is_empty() || !inputs.len().is_multiple_of(d) {
            return Err(Error::invalid(format!(
                "batch must hold a positive multiple of {d} input values, got {}",
                inputs.len()
            )));
        }
        if inputs.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite network input"));
        }
        Ok(inputs.len() / d)
    }

    fn forward_batch(&self, inputs: &[f64], n: usize, ws: &mut Workspace) {
        let depth = self.layers.len();
        ws.activations.resize_with(depth + 1, Vec::new);
        ws.activations[0].clear();
        ws.activations[0].extend_from_slice(inputs);
        for (l, layer) in self.layers.iter().enumerate() {
            let (done, rest) = ws.activations.split_at_mut(l + 1);
            let prev = &done[l];
            let next = &mut rest[0];
            next.clear();
            next.extend(
                std::iter::repeat_n(&layer.biases, n)
                    .flat_map(|b| b.iter().copied()),
            );
            gemm(
                1.0,
                MatRef::new(prev, n, layer.fan_in),
                MatRef::new(&layer.weights, layer.fan_out, layer.fan_in).t(),
                1.0,
                next,
            );
            if l + 1 == depth {
                next.iter_mut().for_each(|z| *z = sigmoid(*z));
            } else {
                next.iter_mut().for_each(|z| *z = z.tanh());
            }
        }
    }
}

/// Per-layer activations of a single forward pass; `activations[0]` is the input.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub activations: Vec<Vec<f64>>,
}

/// Scratch buffers reused across batched passes.
#[derive(Debug, Default)]
pub struct Workspace {
    activations: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

/// Loss gradient with respect to every parameter, shaped like [`NetworkParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    layers: Vec<LayerParams>,
}

impl Gradients {
    pub fn zeros_like(params: &NetworkParams) -> Self {
        Self {
            layers: zeros_for(&params.arch),
        }
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams] {
        &mut self.layers
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(LayerParams::values)
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(LayerParams::values_mut)
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}
