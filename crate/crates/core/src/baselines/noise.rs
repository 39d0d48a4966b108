use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::{Error, Image, Result};

/// Additive Gaussian noise with a standard deviation given on the 0-255 scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma_8bit: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma_8bit: f64, seed: u64) -> Result<Self> {
        if !(sigma_8bit >= 0.0 && sigma_8bit.is_finite()) {
            return Err(Error::invalid(format!(
                "noise sigma must be non-negative, got {sigma_8bit}"
            )));
        }
        Ok(Self { sigma_8bit, seed })
    }
}

/// Adds i.i.d. `N(0, (sigma_8bit / 255)^2)` noise to every channel value and
/// clamps the result to `[0, 1]`.
pub fn add_gaussian_noise(image: &Image, spec: NoiseSpec) -> Result<Image> {
    let spec = NoiseSpec::new(spec.sigma_8bit, spec.seed)?;
    if spec.sigma_8bit == 0.0 {
        return Ok(image.clone());
    }
    let normal = Normal::new(0.0, spec.sigma_8bit / 255.0)
        .map_err(|e| Error::invalid(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let data = image
        .as_slice()
        .iter()
        .map(|&v| v + normal.sample(&mut rng))
        .collect();
    Ok(Image::from_clamped(image.height(), image.width(), data))
}
