use coconet::baselines::{add_gaussian_noise, NoiseSpec};
use coconet::dataio::load_cifar10_test;
use coconet::metrics::{psnr, ssim, MetricRecord, MetricsReport};
use coconet::model::{denoise, TrainConfig};
use coconet::Image;
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::output::{fmt_psnr, fmt_ssim, render_table, OutputDir, TABLE_FILE};
use crate::run::{derive_seed, BenchmarkRun, Experiment, Method, STREAM_NOISE};
use crate::{merge_outcomes, BenchmarkReport, ImageOutcome};

/// Loads the first `subset_size` images of a CIFAR-10 batch file.
pub fn load_cifar_subset(run: &BenchmarkRun) -> Result<Vec<Image>> {
    let records = load_cifar10_test(&run.dataset)
        .map_err(|e| HarnessError::Dataset(format!("{}: {e}", run.dataset.display())))?;
    if records.len() < run.subset_size {
        return Err(HarnessError::Dataset(format!(
            "{} holds {} images, subset of {} requested",
            run.dataset.display(),
            records.len(),
            run.subset_size
        )));
    }
    Ok(records
        .into_iter()
        .take(run.subset_size)
        .map(|r| r.image)
        .collect())
}

pub fn cifar_image_id(index: usize) -> String {
    format!("{index:05}")
}

/// Noise seed for image `index` at level `sigma`; keyed by the sigma value so
/// reordering the sigma list does not change the noise.
pub fn noise_seed(run: &BenchmarkRun, index: usize, sigma: f64) -> u64 {
    derive_seed(derive_seed(run.image_seed(index), STREAM_NOISE), sigma.to_bits())
}

/// Adds noise to each image, applies every selected method and scores it
/// against the clean image.
pub fn run_denoise_benchmark(run: &BenchmarkRun) -> Result<BenchmarkReport> {
    if run.experiment != Experiment::Denoise {
        return Err(HarnessError::Config("not a denoising run".into()));
    }
    run.validate()?;
    let images = load_cifar_subset(run)?;
    denoise_images(run, &images)
}

/// [`run_denoise_benchmark`] on images already in memory.
pub fn denoise_images(run: &BenchmarkRun, images: &[Image]) -> Result<BenchmarkReport> {
    run.validate()?;
    let out = run.output_dir.as_ref().map(OutputDir::create).transpose()?;
    let pool = run.thread_pool()?;
    let outcomes: Vec<Result<ImageOutcome>> = pool.install(|| {
        images
            .par_iter()
            .enumerate()
            .map(|(i, img)| denoise_one(run, i, img, out.as_ref()))
            .collect()
    });
    let report = merge_outcomes(outcomes, images.len())?;
    let table = denoise_table(&report.metrics, &run.methods, &run.sigmas);
    if let Some(out) = &out {
        out.write_records(&report.metrics)?;
        out.write_aggregates(&report.metrics)?;
        out.write_text(TABLE_FILE, &table)?;
    }
    Ok(BenchmarkReport { table, ..report })
}

fn denoise_one(
    run: &BenchmarkRun,
    index: usize,
    clean: &Image,
    out: Option<&OutputDir>,
) -> Result<ImageOutcome> {
    let id = cifar_image_id(index);
    let config = run.train_config(TrainConfig::denoising(), index, clean.height(), clean.width());
    if let Some(out) = out {
        out.write_image(&format!("{id}_clean.ppm"), clean)?;
    }
    let mut records = Vec::new();
    for &sigma in &run.sigmas {
        let noisy = add_gaussian_noise(clean, NoiseSpec::new(sigma, noise_seed(run, index, sigma))?)?;
        for method in &run.methods {
            let result = match method {
                Method::Noisy => noisy.clone(),
                Method::Filter(spec) => spec.apply(&noisy)?,
                Method::CocoNet => match denoise(&noisy, &config) {
                    Ok(img) => img,
                    Err(e @ coconet::Error::Diverged { .. }) => {
                        return Ok(ImageOutcome::Diverged {
                            image_id: id,
                            reason: format!("sigma {sigma}: {e}"),
                        })
                    }
                    Err(e) => return Err(e.into()),
                },
                Method::Bicubic => unreachable!("rejected by validation"),
            };
            if let Some(out) = out {
                out.write_image(&format!("{id}_s{sigma}_{}.ppm", method.id()), &result)?;
            }
            records.push(MetricRecord {
                image_id: id.clone(),
                method: method.id(),
                sigma: Some(sigma),
                psnr_db: psnr(clean, &result)?,
                ssim: ssim(clean, &result)?,
            });
        }
    }
    Ok(ImageOutcome::Scored(records))
}

/// Methods as rows, a PSNR and an SSIM column per noise level.
pub fn denoise_table(report: &MetricsReport, methods: &[Method], sigmas: &[f64]) -> String {
    let mut header = vec!["Method".to_owned()];
    for s in sigmas {
        header.push(format!("sigma={s} PSNR"));
        header.push(format!("sigma={s} SSIM"));
    }
    let rows: Vec<Vec<String>> = methods
        .iter()
        .map(|m| {
            let mut row = vec![m.label()];
            for &s in sigmas {
                match report.aggregate(&m.id(), Some(s)) {
                    Some(a) => {
                        row.push(fmt_psnr(a.mean_psnr_db));
                        row.push(fmt_ssim(a.mean_ssim));
                    }
                    None => row.extend(["-".to_owned(), "-".to_owned()]),
                }
            }
            row
        })
        .collect();
    render_table(&header, &rows)
}
