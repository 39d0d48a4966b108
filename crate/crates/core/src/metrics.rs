//! Image quality metrics.
//!
//! PSNR is computed on `[0, 1]` values with a peak of 1. SSIM is the usual
//! single-scale form: an 11x11 Gaussian window with sigma 1.5, `K1 = 0.01`,
//! `K2 = 0.03`, evaluated at every window position that fits inside the
//! image (no padding), averaged over positions and then over the three
//! channels.

use std::collections::BTreeMap;

use crate::{Error, Image, Result};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn check_same_dims(reference: &Image, test: &Image) -> Result<()> {
    if reference.dims() != test.dims() {
        return Err(Error::invalid(format!(
            "image dimensions differ: {:?} vs {:?}",
            reference.dims(),
            test.dims()
        )));
    }
    Ok(())
}

/// Mean squared error over all pixels and channels.
pub fn mse(reference: &Image, test: &Image) -> Result<f64> {
    check_same_dims(reference, test)?;
    Ok(mse_slices(reference.as_slice(), test.as_slice()))
}

fn mse_slices(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    sum / a.len() as f64
}

/// Peak signal-to-noise ratio in dB; `+inf` for identical images.
pub fn psnr(reference: &Image, test: &Image) -> Result<f64> {
    Ok(psnr_from_mse(mse(reference, test)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    }
}

/// PSNR restricted to pixels where `include(row, col)` holds.
pub fn masked_psnr(
    reference: &Image,
    test: &Image,
    include: impl Fn(usize, usize) -> bool,
) -> Result<f64> {
    check_same_dims(reference, test)?;
    let (mut sum, mut count) = (0.0, 0usize);
    for row in 0..reference.height() {
        for col in 0..reference.width() {
            if include(row, col) {
                let (a, b) = (reference.pixel(row, col), test.pixel(row, col));
                sum += a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
                count += 3;
            }
        }
    }
    if count == 0 {
        return Err(Error::invalid("metric mask selects no pixels"));
    }
    Ok(psnr_from_mse(sum / count as f64))
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut w = [0.0; SSIM_WINDOW];
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Valid-mode separable filtering of a `height x width` plane.
fn filter_valid(plane: &[f64], height: usize, width: usize, kernel: &[f64]) -> Vec<f64> {
    let k = kernel.len();
    let (oh, ow) = (height - k + 1, width - k + 1);
    let mut horizontal = vec![0.0; height * ow];
    for r in 0..height {
        let row = &plane[r * width..(r + 1) * width];
        for c in 0..ow {
            horizontal[r * ow + c] = kernel.iter().zip(&row[c..c + k]).map(|(w, v)| w * v).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = kernel
                .iter()
                .enumerate()
                .map(|(i, w)| w * horizontal[(r + i) * ow + c])
                .sum();
        }
    }
    out
}

fn ssim_plane(x: &[f64], y: &[f64], height: usize, width: usize) -> f64 {
    let window = gaussian_window();
    let c1 = (SSIM_K1 * 1.0).powi(2);
    let c2 = (SSIM_K2 * 1.0).powi(2);
    let product = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).collect::<Vec<_>>();

    let mu_x = filter_valid(x, height, width, &window);
    let mu_y = filter_valid(y, height, width, &window);
    let xx = filter_valid(&product(x, x), height, width, &window);
    let yy = filter_valid(&product(y, y), height, width, &window);
    let xy = filter_valid(&product(x, y), height, width, &window);

    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let var_x = xx[i] - mx * mx;
            let var_y = yy[i] - my * my;
            let cov = xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (var_x + var_y + c2))
        })
        .sum();
    total / mu_x.len() as f64
}

/// Structural similarity index, averaged over window positions then channels.
pub fn ssim(reference: &Image, test: &Image) -> Result<f64> {
    check_same_dims(reference, test)?;
    let (h, w) = reference.dims();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {h}x{w}"
        )));
    }
    let total: f64 = (0..Image::CHANNELS)
        .map(|c| ssim_plane(&reference.channel(c), &test.channel(c), h, w))
        .sum();
    Ok(total / Image::CHANNELS as f64)
}

/// One metric measurement of one method on one image.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub image_id: String,
    pub method: String,
    /// Noise level on the 8-bit scale, when the experiment has one.
    pub sigma: Option<f64>,
    pub psnr_db: f64,
    pub ssim: f64,
}

/// Mean metrics for one `(method, sigma)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub method: String,
    pub sigma: Option<f64>,
    pub count: usize,
    pub mean_psnr_db: f64,
    pub mean_ssim: f64,
}

/// Per-image metric records and their per-method means.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    pub records: Vec<MetricRecord>,
}

impl MetricsReport {
    pub fn push(&mut self, record: MetricRecord) {
        self.records.push(record);
    }

    /// Arithmetic means grouped by method and sigma, in first-seen order.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut order: Vec<(String, Option<u64>)> = Vec::new();
        let mut sums: BTreeMap<(String, Option<u64>), (usize, f64, f64)> = BTreeMap::new();
        for r in &self.records {
            let key = (r.method.clone(), r.sigma.map(f64::to_bits));
            let entry = sums.entry(key.clone()).or_insert_with(|| {
                order.push(key);
                (0, 0.0, 0.0)
            });
            entry.0 += 1;
            entry.1 += r.psnr_db;
            entry.2 += r.ssim;
        }
        order
            .into_iter()
            .map(|key| {
                let (count, psnr, ssim) = sums[&key];
                Aggregate {
                    method: key.0,
                    sigma: key.1.map(f64::from_bits),
                    count,
                    mean_psnr_db: psnr / count as f64,
                    mean_ssim: ssim / count as f64,
                }
            })
            .collect()
    }

    pub fn aggregate(&self, method: &str, sigma: Option<f64>) -> Option<Aggregate> {
        self.aggregates()
            .into_iter()
            .find(|a| a.method == method && a.sigma == sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(h: usize, w: usize, rng: &mut impl Rng) -> Image {
        Image::from_fn(h, w, |_, _| [rng.random(), rng.random(), rng.random()]).unwrap()
    }

    #[test]
    fn psnr_identical_is_infinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = random_image(8, 8, &mut rng);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn psnr_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Image::from_fn(6, 5, |_, _| {
            [rng.random_range(0.0..0.9), rng.random_range(0.0..0.9), rng.random_range(0.0..0.9)]
        })
        .unwrap();
        let b = Image::new(6, 5, a.as_slice().iter().map(|v| v + 0.1).collect()).unwrap();
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn dims_must_match() {
        let a = Image::filled(12, 12, [0.5; 3]).unwrap();
        let b = Image::filled(12, 13, [0.5; 3]).unwrap();
        assert!(psnr(&a, &b).is_err());
        assert!(ssim(&a, &b).is_err());
        let small = Image::filled(10, 40, [0.5; 3]).unwrap();
        assert!(ssim(&small, &small).is_err());
    }

    #[test]
    fn ssim_identical_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_image(16, 20, &mut rng);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ssim_of_negative_is_negative() {
        let a = Image::from_fn(24, 24, |r, c| {
            let v = 0.5 + 0.3 * ((r as f64 * 0.7).sin() * (c as f64 * 0.4).cos());
            [v, 1.0 - v, 0.5 + 0.2 * (r as f64 * 0.3).cos()]
        })
        .unwrap();
        let neg = Image::new(24, 24, a.as_slice().iter().map(|v| 1.0 - v).collect()).unwrap();
        assert!(ssim(&a, &neg).unwrap() < 0.0);
    }

    #[test]
    fn masked_psnr_ignores_excluded_pixels() {
        let a = Image::filled(4, 4, [0.2; 3]).unwrap();
        let b = Image::from_fn(4, 4, |r, _| if r == 0 { [0.9; 3] } else { [0.3; 3] }).unwrap();
        let p = masked_psnr(&a, &b, |r, _| r > 0).unwrap();
        assert!((p - 20.0).abs() < 1e-9);
        assert!(masked_psnr(&a, &b, |_, _| false).is_err());
    }

    #[test]
    fn report_aggregates() {
        let mut report = MetricsReport::default();
        for (i, (p, s)) in [(20.0, 0.5), (30.0, 0.7)].into_iter().enumerate() {
            report.push(MetricRecord {
                image_id: i.to_string(),
                method: "noisy".into(),
                sigma: Some(10.0),
                psnr_db: p,
                ssim: s,
            });
        }
        report.push(MetricRecord {
            image_id: "0".into(),
            method: "noisy".into(),
            sigma: Some(20.0),
            psnr_db: 1.0,
            ssim: 0.1,
        });
        let aggs = report.aggregates();
        assert_eq!(aggs.len(), 2);
        assert_eq!(aggs[0].count, 2);
        assert!((aggs[0].mean_psnr_db - 25.0).abs() < 1e-12);
        assert!((aggs[0].mean_ssim - 0.6).abs() < 1e-12);
        assert_eq!(report.aggregate("noisy", Some(20.0)).unwrap().count, 1);
    }
}
