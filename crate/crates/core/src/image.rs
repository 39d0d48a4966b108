use crate::{Error, Result};

/// An RGB image with channel values in `[0, 1]`.
///
/// Pixels are stored row-major with the three channels interleaved, so the
/// value of channel `c` at `(row, col)` lives at `(row * width + col) * 3 + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Image {
    pub const CHANNELS: usize = 3;

    /// Wraps an interleaved buffer, rejecting out-of-range or non-finite values.
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if data.len() != height * width * Self::CHANNELS {
            return Err(Error::invalid(format!(
                "expected {} values for a {height}x{width} RGB image, got {}",
                height * width * Self::CHANNELS,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid(format!(
                "pixel value {} at index {i} is outside [0, 1]",
                data[i]
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Builds an image, clamping every value into `[0, 1]`.
    ///
    /// Panics if the buffer length does not match the dimensions or a value is NaN.
    pub fn from_clamped(height: usize, width: usize, mut data: Vec<f64>) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        assert_eq!(data.len(), height * width * Self::CHANNELS);
        for v in &mut data {
            assert!(!v.is_nan(), "NaN pixel value");
            *v = v.clamp(0.0, 1.0);
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn filled(height: usize, width: usize, rgb: [f64; 3]) -> Result<Self> {
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(height * width * Self::CHANNELS)
            .collect();
        Self::new(height, width, data)
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * Self::CHANNELS);
        for row in 0..height {
            for col in 0..width {
                data.extend_from_slice(&f(row, col));
            }
        }
        Self::new(height, width, data)
    }

    /// Converts 8-bit interleaved RGB bytes (`v / 255`).
    pub fn from_rgb8(height: usize, width: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(
            height,
            width,
            bytes.iter().map(|&b| f64::from(b) / 255.0).collect(),
        )
    }

    /// Quantizes to 8-bit interleaved RGB with `round(v * 255)`.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| (v * 255.0).round() as u8)
            .collect()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        let i = (row * self.width + col) * Self::CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Extracts one channel as a row-major `height * width` plane.
    pub fn channel(&self, c: usize) -> Vec<f64> {
        assert!(c < Self::CHANNELS);
        self.data
            .iter()
            .skip(c)
            .step_by(Self::CHANNELS)
            .copied()
            .collect()
    }

    /// Reassembles an image from three planes, clamping into `[0, 1]`.
    pub fn from_planes(height: usize, width: usize, planes: &[Vec<f64>; 3]) -> Self {
        let n = height * width;
        assert!(planes.iter().all(|p| p.len() == n));
        let mut data = Vec::with_capacity(n * Self::CHANNELS);
        for i in 0..n {
            for plane in planes {
                data.push(plane[i]);
            }
        }
        Self::from_clamped(height, width, data)
    }

    /// Copies out a rectangular region.
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        if top + height > self.height || left + width > self.width {
            return Err(Error::invalid(format!(
                "crop {height}x{width}+{top}+{left} exceeds {}x{} image",
                self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(height * width * Self::CHANNELS);
        for row in top..top + height {
            let start = (row * self.width + left) * Self::CHANNELS;
            data.extend_from_slice(&self.data[start..start + width * Self::CHANNELS]);
        }
        Self::new(height, width, data)
    }
}
