//! Coordinate-to-color networks.
//!
//! A small dense network is trained on a single image to map the location of
//! every pixel (expressed in two Cartesian frames and one polar frame) to its
//! RGB value. The trained weights are a continuous encoding of the image which
//! can be evaluated at any resolution, used as an implicit smoother for noisy
//! inputs, or asked to fill in a region it never saw.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`]: dense tanh/sigmoid network, analytic backpropagation, Adam.
//! - [`coords`]: the six-component coordinate features and sampling grids.
//! - [`model`]: training, reconstruction, and the denoise / upsample /
//!   complete entry points.
//! - [`baselines`]: classical filters, bicubic resampling and noise injection.
//! - [`metrics`]: PSNR and SSIM, plus the per-image report container.
//! - [`dataio`]: CIFAR-10 batches, portable pixmaps and the encoded-model file.

pub mod baselines;
pub mod coords;
pub mod dataio;
mod error;
mod image;
pub mod metrics;
pub mod model;
pub mod nn;

pub use crate::error::{Error, Result};
pub use crate::image::Image;
