use super::{validate_kernel_size, FilterKind, FilterSpec};
use crate::{Error, Image, Result};

/// A normalized square convolution kernel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub size: usize,
    pub weights: Vec<f64>,
}

impl Kernel {
    pub fn box_filter(size: usize) -> Result<Self> {
        validate_kernel_size(size)?;
        let n = size * size;
        Ok(Self {
            size,
            weights: vec![1.0 / n as f64; n],
        })
    }
}

/// `k x k` Gaussian kernel with standard deviation `sigma`, summing to one.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Kernel> {
    validate_kernel_size(size)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("gaussian sigma must be positive, got {sigma}")));
    }
    let half = (size / 2) as f64;
    let mut weights = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let (dy, dx) = (i as f64 - half, j as f64 - half);
            weights.push((-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(Kernel { size, weights })
}

#[inline]
fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// Visits the replicate-padded `k x k` neighbourhood of `(row, col)`.
#[inline]
fn neighbourhood(
    plane: &[f64],
    height: usize,
    width: usize,
    row: usize,
    col: usize,
    k: usize,
    mut f: impl FnMut(usize, usize, f64),
) {
    let half = (k / 2) as isize;
    for i in 0..k {
        let r = clamp_index(row as isize + i as isize - half, height);
        for j in 0..k {
            let c = clamp_index(col as isize + j as isize - half, width);
            f(i, j, plane[r * width + c]);
        }
    }
}

/// Convolves one row-major plane with replicate padding. No clamping, so the
/// operation is exactly linear in the input.
pub fn convolve_plane(plane: &[f64], height: usize, width: usize, kernel: &Kernel) -> Vec<f64> {
    assert_eq!(plane.len(), height * width);
    let mut out = vec![0.0; plane.len()];
    for row in 0..height {
        for col in 0..width {
            let mut acc = 0.0;
            neighbourhood(plane, height, width, row, col, kernel.size, |i, j, v| {
                acc += kernel.weights[i * kernel.size + j] * v;
            });
            out[row * width + col] = acc;
        }
    }
    out
}

fn per_channel(image: &Image, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Image {
    let planes = [0, 1, 2].map(|c| f(&image.channel(c)));
    Image::from_planes(image.height(), image.width(), &planes)
}

pub fn mean_filter(image: &Image, kernel_size: usize) -> Result<Image> {
    let kernel = Kernel::box_filter(kernel_size)?;
    let (h, w) = image.dims();
    Ok(per_channel(image, |p| convolve_plane(p, h, w, &kernel)))
}

pub fn gaussian_filter(image: &Image, kernel_size: usize, sigma: f64) -> Result<Image> {
    let kernel = gaussian_kernel(kernel_size, sigma)?;
    let (h, w) = image.dims();
    Ok(per_channel(image, |p| convolve_plane(p, h, w, &kernel)))
}

pub fn median_filter(image: &Image, kernel_size: usize) -> Result<Image> {
    validate_kernel_size(kernel_size)?;
    let (h, w) = image.dims();
    let mut window = Vec::with_capacity(kernel_size * kernel_size);
    Ok(per_channel(image, |plane| {
        let mut out = vec![0.0; plane.len()];
        for row in 0..h {
            for col in 0..w {
                window.clear();
                neighbourhood(plane, h, w, row, col, kernel_size, |_, _, v| window.push(v));
                let mid = window.len() / 2;
                let (_, median, _) = window.select_nth_unstable_by(mid, f64::total_cmp);
                out[row * w + col] = *median;
            }
        }
        out
    }))
}

pub fn bilateral_filter(image: &Image, spec: &FilterSpec) -> Result<Image> {
    if spec.kind != FilterKind::Bilateral {
        return Err(Error::invalid(format!(
            "bilateral_filter called with a {} spec",
            spec.kind.name()
        )));
    }
    spec.validate()?;
    let k = spec.kernel_size;
    let spatial = gaussian_kernel(k, spec.sigma_spatial)?;
    let range_denominator = 2.0 * spec.sigma_range * spec.sigma_range;
    let (h, w) = image.dims();
    Ok(per_channel(image, |plane| {
        let mut out = vec![0.0; plane.len()];
        for row in 0..h {
            for col in 0..w {
                let center = plane[row * w + col];
                let (mut acc, mut norm) = (0.0, 0.0);
                neighbourhood(plane, h, w, row, col, k, |i, j, v| {
                    let d = v - center;
                    let weight = spatial.weights[i * k + j] * (-d * d / range_denominator).exp();
                    acc += weight * v;
                    norm += weight;
                });
                out[row * w + col] = acc / norm;
            }
        }
        out
    }))
}
