//! Classical comparison methods and corruption generators.
//!
//! All filters work per channel with replicate border padding. Mean and
//! Gaussian filters are plain normalized convolutions, the median filter is
//! the per-channel order statistic, and the bilateral filter weights each
//! neighbour by a spatial Gaussian times a Gaussian on the intensity
//! difference.

mod filters;
mod noise;
mod resize;

pub use filters::{
    bilateral_filter, convolve_plane, gaussian_filter, gaussian_kernel, mean_filter,
    median_filter, Kernel,
};
pub use noise::{add_gaussian_noise, NoiseSpec};
pub use resize::{benchmark_downsample, bicubic_resize, cubic_weight, CATMULL_ROM_A};

use crate::{Error, Image, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Mean,
    Gaussian,
    Median,
    Bilateral,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Mean => "mean",
            FilterKind::Gaussian => "gaussian",
            FilterKind::Median => "median",
            FilterKind::Bilateral => "bilateral",
        }
    }
}

/// A denoising filter and its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub kernel_size: usize,
    /// Spatial standard deviation in pixels (Gaussian and bilateral).
    pub sigma_spatial: f64,
    /// Intensity standard deviation on the `[0, 1]` scale (bilateral only).
    pub sigma_range: f64,
}

impl FilterSpec {
    pub const DEFAULT_SIGMA_RANGE: f64 = 0.1;

    /// Default Gaussian sigma for a `k x k` kernel: `0.3 * ((k - 1) / 2 - 1) + 0.8`,
    /// i.e. 0.8 for 3x3 and 1.1 for 5x5.
    pub fn default_gaussian_sigma(kernel_size: usize) -> f64 {
        0.3 * ((kernel_size as f64 - 1.0) * 0.5 - 1.0) + 0.8
    }

    pub fn mean(kernel_size: usize) -> Self {
        Self {
            kind: FilterKind::Mean,
            kernel_size,
            sigma_spatial: 0.0,
            sigma_range: 0.0,
        }
    }

    pub fn gaussian(kernel_size: usize) -> Self {
        Self {
            kind: FilterKind::Gaussian,
            kernel_size,
            sigma_spatial: Self::default_gaussian_sigma(kernel_size),
            sigma_range: 0.0,
        }
    }

    pub fn median(kernel_size: usize) -> Self {
        Self {
            kind: FilterKind::Median,
            kernel_size,
            sigma_spatial: 0.0,
            sigma_range: 0.0,
        }
    }

    /// Bilateral filter with `sigma_spatial = k / 2` and `sigma_range = 0.1`.
    pub fn bilateral(kernel_size: usize) -> Self {
        Self {
            kind: FilterKind::Bilateral,
            kernel_size,
            sigma_spatial: kernel_size as f64 / 2.0,
            sigma_range: Self::DEFAULT_SIGMA_RANGE,
        }
    }

    /// Short identifier such as `gaussian3`.
    pub fn id(&self) -> String {
        format!("{}{}", self.kind.name(), self.kernel_size)
    }

    pub fn validate(&self) -> Result<()> {
        validate_kernel_size(self.kernel_size)?;
        let needs_spatial = matches!(self.kind, FilterKind::Gaussian | FilterKind::Bilateral);
        if needs_spatial && !(self.sigma_spatial > 0.0 && self.sigma_spatial.is_finite()) {
            return Err(Error::invalid(format!(
                "{} filter needs a positive spatial sigma, got {}",
                self.kind.name(),
                self.sigma_spatial
            )));
        }
        if self.kind == FilterKind::Bilateral && self.sigma_range.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::invalid(format!(
                "bilateral filter needs a positive range sigma, got {}",
                self.sigma_range
            )));
        }
        Ok(())
    }

    pub fn apply(&self, image: &Image) -> Result<Image> {
        self.validate()?;
        match self.kind {
            FilterKind::Mean => mean_filter(image, self.kernel_size),
            FilterKind::Gaussian => gaussian_filter(image, self.kernel_size, self.sigma_spatial),
            FilterKind::Median => median_filter(image, self.kernel_size),
            FilterKind::Bilateral => bilateral_filter(image, self),
        }
    }
}

pub(crate) fn validate_kernel_size(k: usize) -> Result<()> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::invalid(format!("kernel size must be odd, got {k}")));
    }
    Ok(())
}
