//! Training a coordinate-to-color network on one image and evaluating it.
//!
//! [`train`] fits a fresh network to the observed pixels of an image;
//! [`reconstruct`] evaluates the trained function on an arbitrary output
//! grid. Denoising, upsampling and completion are thin wrappers: the network
//! is never told about noise, scale or missing regions, those effects come
//! from the smoothness of the learned function.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coords::{self, GridSpec, FEATURE_CONVENTION};
use crate::nn::{AdamState, Gradients, NetworkArch, NetworkParams, Workspace};
use crate::{Error, Image, Result};

/// Rows evaluated per forward call when reconstructing large images.
const PREDICT_CHUNK: usize = 4096;

/// How training samples are grouped into optimizer steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchPolicy {
    /// One step per epoch over every observed pixel.
    FullBatch,
    /// Shuffled mini-batches of the given size; the last one may be short.
    MiniBatch(usize),
}

/// Stop once the epoch loss improved by less than `min_improvement` over the
/// last `window` epochs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStop {
    pub window: usize,
    pub min_improvement: f64,
}

impl EarlyStop {
    pub const PLATEAU: EarlyStop = EarlyStop {
        window: 100,
        min_improvement: 1e-6,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub arch: NetworkArch,
    pub lr: f64,
    pub epochs: usize,
    pub batch_policy: BatchPolicy,
    pub seed: u64,
    /// Epochs after which a full reconstruction is captured; 0 means before training.
    pub snapshot_epochs: Vec<usize>,
    pub early_stop: Option<EarlyStop>,
}

impl TrainConfig {
    pub const DEFAULT_LR: f64 = 1e-4;
    pub const DEFAULT_EPOCHS: usize = 3000;
    pub const LARGE_IMAGE_EPOCHS: usize = 1500;
    /// Mini-batch size for images of at most [`Self::SMALL_IMAGE_PIXELS`] pixels.
    pub const SMALL_IMAGE_BATCH: usize = 32;
    pub const LARGE_IMAGE_BATCH: usize = 4096;
    pub const SMALL_IMAGE_PIXELS: usize = 64 * 64;

    pub fn new(arch: NetworkArch) -> Self {
        Self {
            arch,
            lr: Self::DEFAULT_LR,
            epochs: Self::DEFAULT_EPOCHS,
            batch_policy: BatchPolicy::FullBatch,
            seed: 0,
            snapshot_epochs: Vec::new(),
            early_stop: None,
        }
    }

    /// 15 hidden layers of 200 units; used for memorization and denoising.
    pub fn denoising() -> Self {
        Self::new(NetworkArch::uniform(15, 200))
    }

    /// 10 hidden layers of 200 units; used for upsampling and completion.
    pub fn resampling() -> Self {
        Self::new(NetworkArch::uniform(10, 200))
    }

    /// Adapts batching and epoch budget to the image size: small images use
    /// batches of 32 for 3000 epochs, larger ones batches of 4096 for 1500
    /// epochs with a plateau stop.
    pub fn sized_for(mut self, height: usize, width: usize) -> Self {
        if height * width <= Self::SMALL_IMAGE_PIXELS {
            self.batch_policy = BatchPolicy::MiniBatch(Self::SMALL_IMAGE_BATCH);
        } else {
            self.batch_policy = BatchPolicy::MiniBatch(Self::LARGE_IMAGE_BATCH);
            self.epochs = Self::LARGE_IMAGE_EPOCHS;
            self.early_stop = Some(EarlyStop::PLATEAU);
        }
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn with_lr(mut self, lr: f64) -> Self {
        self.lr = lr;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.arch.validate()?;
        if self.arch.input_dim != NetworkArch::COORD_INPUTS
            || self.arch.output_dim != NetworkArch::COLOR_OUTPUTS
        {
            return Err(Error::invalid(format!(
                "coordinate networks map {} inputs to {} outputs, got {} -> {}",
                NetworkArch::COORD_INPUTS,
                NetworkArch::COLOR_OUTPUTS,
                self.arch.input_dim,
                self.arch.output_dim
            )));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if !(self.lr > 0.0 && self.lr < 1.0) {
            return Err(Error::invalid(format!("learning rate must be in (0, 1), got {}", self.lr)));
        }
        if self.batch_policy == BatchPolicy::MiniBatch(0) {
            return Err(Error::invalid("mini-batch size must be at least 1"));
        }
        if let Some(stop) = self.early_stop {
            if stop.window == 0 {
                return Err(Error::invalid("early-stop window must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl Rect {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.top
            && row < self.top + self.height
            && col >= self.left
            && col < self.left + self.width
    }
}

/// Which pixels take part in training; `true` means observed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    height: usize,
    width: usize,
    observed: Vec<bool>,
}

impl PixelMask {
    pub fn all(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            observed: vec![true; height * width],
        }
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let observed = (0..height * width).map(|i| f(i / width, i % width)).collect();
        let mask = Self {
            height,
            width,
            observed,
        };
        if mask.observed_count() == 0 {
            return Err(Error::invalid("mask excludes every pixel"));
        }
        Ok(mask)
    }

    /// Everything observed except `rect`.
    pub fn excluding(height: usize, width: usize, rect: Rect) -> Result<Self> {
        if rect.top + rect.height > height || rect.left + rect.width > width {
            return Err(Error::invalid(format!(
                "excluded rectangle {rect:?} exceeds {height}x{width} image"
            )));
        }
        Self::from_fn(height, width, |r, c| !rect.contains(r, c))
    }

    /// Square of side `floor(min(h, w) / 4)` at a seeded uniform location.
    pub fn random_square(height: usize, width: usize, seed: u64) -> Result<(Self, Rect)> {
        use rand::Rng;
        let side = height.min(width) / 4;
        if side == 0 {
            return Err(Error::invalid(format!("image {height}x{width} too small for a patch")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rect = Rect {
            top: rng.random_range(0..=height - side),
            left: rng.random_range(0..=width - side),
            height: side,
            width: side,
        };
        Ok((Self::excluding(height, width, rect)?, rect))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.observed[row * self.width + col]
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }
}

/// Network inputs and color targets for the observed pixels of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    height: usize,
    width: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl TrainingSet {
    pub fn from_image(image: &Image, mask: Option<&PixelMask>) -> Result<Self> {
        Self::from_fn(image.height(), image.width(), mask, |r, c| image.pixel(r, c))
    }

    /// Builds the set by querying `pixel` for observed locations only;
    /// excluded pixels are never requested.
    pub fn from_fn(
        height: usize,
        width: usize,
        mask: Option<&PixelMask>,
        mut pixel: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        if let Some(mask) = mask {
            if mask.dims() != (height, width) {
                return Err(Error::invalid(format!(
                    "mask is {:?} but the image is {height}x{width}",
                    mask.dims()
                )));
            }
        }
        let grid = coords::training_grid(height, width)?;
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for point in grid {
            if mask.is_some_and(|m| !m.is_observed(point.row, point.col)) {
                continue;
            }
            let rgb = pixel(point.row, point.col);
            if rgb.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::invalid(format!(
                    "target at ({}, {}) outside [0, 1]: {rgb:?}",
                    point.row, point.col
                )));
            }
            inputs.extend_from_slice(&point.feature.to_array());
            targets.extend_from_slice(&rgb);
        }
        if targets.is_empty() {
            return Err(Error::invalid("no observed pixels to train on"));
        }
        Ok(Self {
            height,
            width,
            inputs,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len() / 3
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

/// A trained network together with what is needed to decode it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: NetworkParams,
    pub source_height: usize,
    pub source_width: usize,
    pub feature_convention: String,
    /// Mean squared error on the training pixels after the last epoch.
    pub final_loss: f64,
}

impl TrainedModel {
    /// Wraps untrained or externally produced parameters.
    pub fn new(params: NetworkParams, source_height: usize, source_width: usize) -> Self {
        Self {
            params,
            source_height,
            source_width,
            feature_convention: FEATURE_CONVENTION.to_owned(),
            final_loss: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub epoch: usize,
    pub image: Image,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    /// Mean training loss of each completed epoch.
    pub loss_history: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

pub fn train(image: &Image, mask: Option<&PixelMask>, config: &TrainConfig) -> Result<TrainOutcome> {
    let set = TrainingSet::from_image(image, mask)?;
    train_on(&set, config)
}

/// Trains a fresh network on a prepared sample set.
pub fn train_on(set: &TrainingSet, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let (height, width) = set.dims();
    let mut params = NetworkParams::init(config.arch.clone(), config.seed)?;
    let mut adam = AdamState::new(&params);
    let mut grads = Gradients::zeros_like(&params);
    let mut ws = Workspace::default();

    let n = set.len();
    let batch = match config.batch_policy {
        BatchPolicy::FullBatch => n,
        BatchPolicy::MiniBatch(size) => size.min(n),
    };
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(1);
    let mut batch_inputs = Vec::with_capacity(batch * 6);
    let mut batch_targets = Vec::with_capacity(batch * 3);

    let mut snapshots = Vec::new();
    let mut snapshot = |epoch: usize, params: &NetworkParams| -> Result<()> {
        if config.snapshot_epochs.contains(&epoch) {
            let model = TrainedModel::new(params.clone(), height, width);
            snapshots.push(Snapshot {
                epoch,
                image: reconstruct(&model, height, width)?,
            });
        }
        Ok(())
    };
    snapshot(0, &params)?;

    let mut loss_history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let mut epoch_loss = 0.0;
        if batch == n {
            epoch_loss = params.backward_with(&set.inputs, &set.targets, &mut ws, &mut grads)?;
            check_step(epoch, epoch_loss, &grads)?;
            adam.step(&mut params, &grads, config.lr)?;
        } else {
            order.shuffle(&mut shuffle_rng);
            for chunk in order.chunks(batch) {
                batch_inputs.clear();
                batch_targets.clear();
                for &i in chunk {
                    batch_inputs.extend_from_slice(&set.inputs[i * 6..i * 6 + 6]);
                    batch_targets.extend_from_slice(&set.targets[i * 3..i * 3 + 3]);
                }
                let loss = params.backward_with(&batch_inputs, &batch_targets, &mut ws, &mut grads)?;
                check_step(epoch, loss, &grads)?;
                adam.step(&mut params, &grads, config.lr)?;
                epoch_loss += loss * chunk.len() as f64;
            }
            epoch_loss /= n as f64;
        }
        loss_history.push(epoch_loss);
        snapshot(epoch, &params)?;

        if let Some(stop) = config.early_stop {
            if epoch > stop.window {
                let before = loss_history[epoch - 1 - stop.window];
                if before - epoch_loss < stop.min_improvement {
                    break;
                }
            }
        }
    }

    if !params.is_finite() {
        return Err(Error::Diverged {
            epoch: loss_history.len(),
            loss: f64::NAN,
        });
    }
    let outputs = predict_chunked(&params, &set.inputs)?;
    let final_loss = outputs
        .iter()
        .zip(&set.targets)
        .map(|(o, t)| (o - t) * (o - t))
        .sum::<f64>()
        / set.targets.len() as f64;

    let mut model = TrainedModel::new(params, height, width);
    model.final_loss = final_loss;
    Ok(TrainOutcome {
        model,
        loss_history,
        snapshots,
    })
}

fn check_step(epoch: usize, loss: f64, grads: &Gradients) -> Result<()> {
    if !loss.is_finite() || !grads.is_finite() {
        return Err(Error::Diverged { epoch, loss });
    }
    Ok(())
}

fn predict_chunked(params: &NetworkParams, inputs: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(inputs.len() / 2);
    for chunk in inputs.chunks(PREDICT_CHUNK * 6) {
        out.extend(params.predict(chunk)?);
    }
    Ok(out)
}

/// Evaluates the trained function on an `out_height x out_width` grid
/// spanning the source image.
pub fn reconstruct(model: &TrainedModel, out_height: usize, out_width: usize) -> Result<Image> {
    let spec = GridSpec {
        source_height: model.source_height,
        source_width: model.source_width,
        out_height,
        out_width,
    };
    let inputs = coords::flatten(coords::resample_grid(spec)?);
    let outputs = predict_chunked(&model.params, &inputs)?;
    Image::new(out_height, out_width, outputs)
}

/// Fits the noisy image and returns the fitted function at the same size.
pub fn denoise(noisy: &Image, config: &TrainConfig) -> Result<Image> {
    let outcome = train(noisy, None, config)?;
    reconstruct(&outcome.model, noisy.height(), noisy.width())
}

/// Fits the low-resolution image and evaluates it `factor` times denser.
pub fn upsample(low_res: &Image, factor: usize, config: &TrainConfig) -> Result<Image> {
    if factor == 0 {
        return Err(Error::invalid("upsampling factor must be positive"));
    }
    upsample_to(low_res, low_res.height() * factor, low_res.width() * factor, config)
}

/// Like [`upsample`] but with explicit output dimensions (e.g. ground-truth size).
pub fn upsample_to(
    low_res: &Image,
    out_height: usize,
    out_width: usize,
    config: &TrainConfig,
) -> Result<Image> {
    let outcome = train(low_res, None, config)?;
    reconstruct(&outcome.model, out_height, out_width)
}

/// Fits the observed pixels and returns the full reconstruction, including
/// the network's continuation into the excluded region.
pub fn complete(image: &Image, mask: &PixelMask, config: &TrainConfig) -> Result<Image> {
    let outcome = train(image, Some(mask), config)?;
    reconstruct(&outcome.model, image.height(), image.width())
}
