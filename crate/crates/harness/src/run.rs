use std::path::PathBuf;

use coconet::baselines::{FilterKind, FilterSpec};
use coconet::model::{BatchPolicy, TrainConfig};
use coconet::nn::NetworkArch;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Denoise,
    Upsample,
    Complete,
    Memorize,
}

/// One column of a metric table.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// The corrupted input itself.
    Noisy,
    Filter(FilterSpec),
    Bicubic,
    CocoNet,
}

impl Method {
    pub fn id(&self) -> String {
        match self {
            Method::Noisy => "noisy".into(),
            Method::Filter(spec) => spec.id(),
            Method::Bicubic => "bicubic".into(),
            Method::CocoNet => "coconet".into(),
        }
    }

    /// Row label used in human-readable tables.
    pub fn label(&self) -> String {
        match self {
            Method::Noisy => "Noisy image".into(),
            Method::Filter(spec) => {
                let k = spec.kernel_size;
                let name = match spec.kind {
                    FilterKind::Mean => "mean filter",
                    FilterKind::Gaussian => "Gaussian filter",
                    FilterKind::Median => "median filter",
                    FilterKind::Bilateral => "bilateral filter",
                };
                format!("{k}x{k} {name}")
            }
            Method::Bicubic => "Bicubic interpolation".into(),
            Method::CocoNet => "CocoNet".into(),
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        let method = match id {
            "noisy" => Method::Noisy,
            "bicubic" => Method::Bicubic,
            "coconet" => Method::CocoNet,
            _ => {
                let split = id
                    .find(|c: char| c.is_ascii_digit())
                    .ok_or_else(|| HarnessError::Config(format!("unknown method {id:?}")))?;
                let (name, size) = id.split_at(split);
                let k: usize = size
                    .parse()
                    .map_err(|_| HarnessError::Config(format!("unknown method {id:?}")))?;
                let spec = match name {
                    "mean" => FilterSpec::mean(k),
                    "gaussian" => FilterSpec::gaussian(k),
                    "median" => FilterSpec::median(k),
                    "bilateral" => FilterSpec::bilateral(k),
                    _ => return Err(HarnessError::Config(format!("unknown method {id:?}"))),
                };
                spec.validate()?;
                Method::Filter(spec)
            }
        };
        Ok(method)
    }

    /// The ten denoising methods in table order.
    pub fn denoising_suite() -> Vec<Method> {
        let mut methods = vec![Method::Noisy];
        for make in [FilterSpec::mean, FilterSpec::gaussian, FilterSpec::median, FilterSpec::bilateral] {
            methods.push(Method::Filter(make(3)));
            methods.push(Method::Filter(make(5)));
        }
        methods.push(Method::CocoNet);
        methods
    }

    pub fn upsampling_suite() -> Vec<Method> {
        vec![Method::Bicubic, Method::CocoNet]
    }
}

/// Command-line adjustments applied on top of an experiment's default config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainOverrides {
    pub depth: Option<usize>,
    pub width: Option<usize>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    /// `Some(0)` forces full-batch training.
    pub batch_size: Option<usize>,
}

impl TrainOverrides {
    pub fn apply(&self, mut config: TrainConfig) -> TrainConfig {
        if self.depth.is_some() || self.width.is_some() {
            let depth = self.depth.unwrap_or(config.arch.hidden_widths.len());
            let width = self
                .width
                .unwrap_or_else(|| config.arch.hidden_widths.first().copied().unwrap_or(200));
            config.arch = NetworkArch::uniform(depth, width);
        }
        if let Some(lr) = self.lr {
            config.lr = lr;
        }
        if let Some(epochs) = self.epochs {
            config.epochs = epochs;
        }
        match self.batch_size {
            Some(0) => config.batch_policy = BatchPolicy::FullBatch,
            Some(n) => config.batch_policy = BatchPolicy::MiniBatch(n),
            None => {}
        }
        config
    }
}

/// Everything one benchmark invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRun {
    pub experiment: Experiment,
    /// CIFAR-10 batch file for denoising, image directory for the others.
    pub dataset: PathBuf,
    pub subset_size: usize,
    /// Noise levels on the 8-bit scale.
    pub sigmas: Vec<f64>,
    pub methods: Vec<Method>,
    pub overrides: TrainOverrides,
    pub output_dir: Option<PathBuf>,
    pub master_seed: u64,
    /// Images processed concurrently; 0 lets the thread pool decide.
    pub workers: usize,
}

impl BenchmarkRun {
    pub const DEFAULT_SUBSET: usize = 50;
    pub const DEFAULT_SIGMAS: [f64; 2] = [10.0, 20.0];

    /// Defaults for `experiment`: the Table 1 or Table 2 method list, 50 images, sigmas 10 and 20.
    pub fn new(experiment: Experiment, dataset: impl Into<PathBuf>) -> Self {
        let methods = match experiment {
            Experiment::Denoise => Method::denoising_suite(),
            Experiment::Upsample => Method::upsampling_suite(),
            Experiment::Complete | Experiment::Memorize => vec![Method::CocoNet],
        };
        Self {
            experiment,
            dataset: dataset.into(),
            subset_size: Self::DEFAULT_SUBSET,
            sigmas: Self::DEFAULT_SIGMAS.to_vec(),
            methods,
            overrides: TrainOverrides::default(),
            output_dir: None,
            master_seed: 0,
            workers: 1,
        }
    }

    /// Replaces the filter sigmas of every selected Gaussian or bilateral method.
    pub fn set_filter_sigmas(
        &mut self,
        gaussian: Option<f64>,
        bilateral_spatial: Option<f64>,
        bilateral_range: Option<f64>,
    ) {
        for method in &mut self.methods {
            if let Method::Filter(spec) = method {
                match spec.kind {
                    FilterKind::Gaussian => {
                        spec.sigma_spatial = gaussian.unwrap_or(spec.sigma_spatial);
                    }
                    FilterKind::Bilateral => {
                        spec.sigma_spatial = bilateral_spatial.unwrap_or(spec.sigma_spatial);
                        spec.sigma_range = bilateral_range.unwrap_or(spec.sigma_range);
                    }
                    FilterKind::Mean | FilterKind::Median => {}
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.subset_size == 0 {
            return Err(HarnessError::Config("subset size must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(HarnessError::Config("no methods selected".into()));
        }
        if self.experiment == Experiment::Denoise {
            if self.sigmas.is_empty() {
                return Err(HarnessError::Config("no noise levels selected".into()));
            }
            if let Some(s) = self.sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
                return Err(HarnessError::Config(format!("invalid noise level {s}")));
            }
        }
        for method in &self.methods {
            let allowed = match (self.experiment, method) {
                (Experiment::Denoise, Method::Bicubic) => false,
                (Experiment::Denoise, _) => true,
                (Experiment::Upsample, m) => matches!(m, Method::Bicubic | Method::CocoNet),
                (_, m) => *m == Method::CocoNet,
            };
            if !allowed {
                return Err(HarnessError::Config(format!(
                    "method {} does not apply to this experiment",
                    method.id()
                )));
            }
            if let Method::Filter(spec) = method {
                spec.validate()?;
            }
        }
        let probe = self.overrides.apply(TrainConfig::denoising());
        probe
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }

    /// Training config for image `index` of size `height x width`.
    pub fn train_config(&self, base: TrainConfig, index: usize, height: usize, width: usize) -> TrainConfig {
        let config = base
            .sized_for(height, width)
            .with_seed(derive_seed(self.image_seed(index), STREAM_INIT));
        self.overrides.apply(config)
    }

    pub fn image_seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }

    pub(crate) fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| HarnessError::Config(format!("cannot start workers: {e}")))
    }
}

pub(crate) const STREAM_INIT: u64 = 0x1417;
pub(crate) const STREAM_NOISE: u64 = 0x2a5e;
pub(crate) const STREAM_MASK: u64 = 0x3a5c;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a parent seed with a stream index into an independent child seed.
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    splitmix64(parent ^ splitmix64(stream))
}
