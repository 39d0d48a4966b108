use coconet::metrics::masked_psnr;
use coconet::model::{complete, PixelMask, Rect, TrainConfig};
use coconet::Image;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::output::{fmt_psnr, render_table, OutputDir, TABLE_FILE};
use crate::run::{derive_seed, BenchmarkRun, Experiment, STREAM_MASK};
use crate::upsample::load_image_dir;

pub const MASKS_FILE: &str = "masks.csv";

/// Result of completing one image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRecord {
    pub image_id: String,
    pub mask_top: usize,
    pub mask_left: usize,
    pub mask_size: usize,
    /// PSNR over the pixels the network was trained on.
    pub observed_psnr_db: f64,
    /// Extremes of the completed patch, all channels.
    pub masked_min: f64,
    pub masked_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionReport {
    pub records: Vec<CompletionRecord>,
    pub table: String,
}

/// Hides a seeded square in each image, trains on the rest and fills the
/// square from the learned function.
pub fn run_completion_demo(run: &BenchmarkRun) -> Result<CompletionReport> {
    if run.experiment != Experiment::Complete {
        return Err(HarnessError::Config("not a completion run".into()));
    }
    run.validate()?;
    let images = load_image_dir(&run.dataset, run.subset_size)?;
    complete_images(run, &images)
}

/// [`run_completion_demo`] on images already in memory. Training divergence
/// fails the run: with a handful of images one failure already exceeds 5%.
pub fn complete_images(run: &BenchmarkRun, images: &[(String, Image)]) -> Result<CompletionReport> {
    run.validate()?;
    let out = run.output_dir.as_ref().map(OutputDir::create).transpose()?;
    let pool = run.thread_pool()?;
    let outcomes: Vec<Result<Option<CompletionRecord>>> = pool.install(|| {
        images
            .par_iter()
            .enumerate()
            .map(|(i, (id, img))| complete_one(run, i, id, img, out.as_ref()))
            .collect()
    });
    let mut records = Vec::new();
    let mut diverged = 0;
    for outcome in outcomes {
        match outcome? {
            Some(r) => records.push(r),
            None => diverged += 1,
        }
    }
    if diverged * 20 > images.len() {
        return Err(HarnessError::DivergenceRate {
            diverged,
            total: images.len(),
        });
    }
    let table = completion_table(&records);
    if let Some(out) = &out {
        let mut w = csv::Writer::from_path(out.path(MASKS_FILE)?)?;
        for r in &records {
            w.serialize(r)?;
        }
        w.flush()?;
        out.write_text(TABLE_FILE, &table)?;
    }
    Ok(CompletionReport { records, table })
}

/// The seeded mask square for image `index`.
pub fn mask_for(run: &BenchmarkRun, index: usize, height: usize, width: usize) -> Result<(PixelMask, Rect)> {
    let seed = derive_seed(run.image_seed(index), STREAM_MASK);
    Ok(PixelMask::random_square(height, width, seed)?)
}

fn complete_one(
    run: &BenchmarkRun,
    index: usize,
    id: &str,
    original: &Image,
    out: Option<&OutputDir>,
) -> Result<Option<CompletionRecord>> {
    let (h, w) = original.dims();
    let (mask, rect) = mask_for(run, index, h, w)?;
    let config = run.train_config(TrainConfig::resampling(), index, h, w);
    let completed = match complete(original, &mask, &config) {
        Ok(img) => img,
        Err(e @ coconet::Error::Diverged { .. }) => {
            log::warn!("excluding image {id}: {e}");
            return Ok(None);
        }
        Err(e) => return Err(e.into()),
    };
    let observed_psnr_db = masked_psnr(original, &completed, |r, c| mask.is_observed(r, c))?;
    let (mut masked_min, mut masked_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in rect.top..rect.top + rect.height {
        for c in rect.left..rect.left + rect.width {
            for v in completed.pixel(r, c) {
                masked_min = masked_min.min(v);
                masked_max = masked_max.max(v);
            }
        }
    }
    if let Some(out) = out {
        let masked = Image::from_fn(h, w, |r, c| {
            if rect.contains(r, c) {
                [0.0; 3]
            } else {
                original.pixel(r, c)
            }
        })?;
        out.write_image(&format!("{id}_original.ppm"), original)?;
        out.write_image(&format!("{id}_masked.ppm"), &masked)?;
        out.write_image(&format!("{id}_completed.ppm"), &completed)?;
    }
    Ok(Some(CompletionRecord {
        image_id: id.to_owned(),
        mask_top: rect.top,
        mask_left: rect.left,
        mask_size: rect.height,
        observed_psnr_db,
        masked_min,
        masked_max,
    }))
}

fn completion_table(records: &[CompletionRecord]) -> String {
    let header: Vec<String> = ["Image", "Mask (top, left, size)", "Observed PSNR", "Patch range"]
        .map(String::from)
        .to_vec();
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.image_id.clone(),
                format!("({}, {}, {})", r.mask_top, r.mask_left, r.mask_size),
                fmt_psnr(r.observed_psnr_db),
                format!("[{:.4}, {:.4}]", r.masked_min, r.masked_max),
            ]
        })
        .collect();
    render_table(&header, &rows)
}
