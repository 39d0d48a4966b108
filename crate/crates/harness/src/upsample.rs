use std::path::Path;

use coconet::baselines::{benchmark_downsample, bicubic_resize};
use coconet::dataio::read_image;
use coconet::metrics::{psnr, ssim, MetricRecord, MetricsReport};
use coconet::model::{upsample_to, TrainConfig};
use coconet::Image;
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::output::{fmt_psnr, fmt_ssim, render_table, OutputDir, TABLE_FILE};
use crate::run::{BenchmarkRun, Experiment, Method};
use crate::{merge_outcomes, BenchmarkReport, ImageOutcome};

pub const SCALE: usize = 4;

/// Set5 image names in table order.
pub const SET5: [&str; 5] = ["baby", "bird", "butterfly", "head", "woman"];

/// PSNR of the kernel-ridge-regression method of Tang et al. on Set5 at 4x,
/// quoted from its publication. Never computed here.
pub const TANG_PSNR: [(&str, f64); 5] = [
    ("baby", 29.70),
    ("bird", 27.84),
    ("butterfly", 20.61),
    ("head", 29.83),
    ("woman", 24.46),
];

fn is_supported(path: &Path) -> bool {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    ext.as_deref() == Some("ppm") || (cfg!(feature = "png") && ext.as_deref() == Some("png"))
}

/// Reads the images of a dataset directory. Files whose names start with a
/// Set5 name are taken in table order; otherwise every readable image is
/// taken in file-name order.
pub fn load_image_dir(dir: &Path, limit: usize) -> Result<Vec<(String, Image)>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| HarnessError::Dataset(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_supported(p))
        .collect();
    files.sort();
    let stem = |p: &Path| {
        p.file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_owned()
    };
    let set5: Vec<_> = SET5
        .iter()
        .filter_map(|name| {
            files
                .iter()
                .find(|p| stem(p).to_ascii_lowercase().starts_with(name))
                .map(|p| (name.to_string(), p.clone()))
        })
        .collect();
    let chosen: Vec<(String, _)> = if set5.is_empty() {
        files.iter().map(|p| (stem(p), p.clone())).collect()
    } else {
        set5
    };
    if chosen.is_empty() {
        return Err(HarnessError::Dataset(format!(
            "{}: no readable images",
            dir.display()
        )));
    }
    chosen
        .into_iter()
        .take(limit)
        .map(|(id, path)| {
            read_image(&path)
                .map(|img| (id, img))
                .map_err(|e| HarnessError::Dataset(format!("{}: {e}", path.display())))
        })
        .collect()
}

/// Downsamples each image by 4, upsamples it back with every selected method
/// and scores the result against the original.
pub fn run_upsample_benchmark(run: &BenchmarkRun) -> Result<BenchmarkReport> {
    if run.experiment != Experiment::Upsample {
        return Err(HarnessError::Config("not an upsampling run".into()));
    }
    run.validate()?;
    let images = load_image_dir(&run.dataset, run.subset_size)?;
    upsample_images(run, &images)
}

/// [`run_upsample_benchmark`] on images already in memory.
pub fn upsample_images(run: &BenchmarkRun, images: &[(String, Image)]) -> Result<BenchmarkReport> {
    run.validate()?;
    let out = run.output_dir.as_ref().map(OutputDir::create).transpose()?;
    let pool = run.thread_pool()?;
    let outcomes: Vec<Result<ImageOutcome>> = pool.install(|| {
        images
            .par_iter()
            .enumerate()
            .map(|(i, (id, img))| upsample_one(run, i, id, img, out.as_ref()))
            .collect()
    });
    let report = merge_outcomes(outcomes, images.len())?;
    let ids: Vec<&str> = images.iter().map(|(id, _)| id.as_str()).collect();
    let table = upsample_table(&report.metrics, &ids);
    if let Some(out) = &out {
        out.write_records(&report.metrics)?;
        out.write_aggregates(&report.metrics)?;
        out.write_text(TABLE_FILE, &table)?;
    }
    Ok(BenchmarkReport { table, ..report })
}

fn upsample_one(
    run: &BenchmarkRun,
    index: usize,
    id: &str,
    original: &Image,
    out: Option<&OutputDir>,
) -> Result<ImageOutcome> {
    let (h, w) = original.dims();
    let low = benchmark_downsample(original, SCALE)?;
    let config = run.train_config(TrainConfig::resampling(), index, low.height(), low.width());
    if let Some(out) = out {
        out.write_image(&format!("{id}_lr.ppm"), &low)?;
    }
    let mut records = Vec::new();
    for method in &run.methods {
        let result = match method {
            Method::Bicubic => bicubic_resize(&low, h, w)?,
            Method::CocoNet => match upsample_to(&low, h, w, &config) {
                Ok(img) => img,
                Err(e @ coconet::Error::Diverged { .. }) => {
                    return Ok(ImageOutcome::Diverged {
                        image_id: id.to_owned(),
                        reason: e.to_string(),
                    })
                }
                Err(e) => return Err(e.into()),
            },
            _ => unreachable!("rejected by validation"),
        };
        if let Some(out) = out {
            out.write_image(&format!("{id}_{}.ppm", method.id()), &result)?;
        }
        records.push(MetricRecord {
            image_id: id.to_owned(),
            method: method.id(),
            sigma: None,
            psnr_db: psnr(original, &result)?,
            ssim: ssim(original, &result)?,
        });
    }
    Ok(ImageOutcome::Scored(records))
}

/// Images as rows; bicubic, quoted Tang et al. and CocoNet columns.
pub fn upsample_table(report: &MetricsReport, ids: &[&str]) -> String {
    let header: Vec<String> = [
        "Image",
        "Bicubic PSNR",
        "Bicubic SSIM",
        "Tang et al.* PSNR",
        "Tang et al.* SSIM",
        "CocoNet PSNR",
        "CocoNet SSIM",
    ]
    .map(String::from)
    .to_vec();
    let cell = |id: &str, method: &str| {
        report
            .records
            .iter()
            .find(|r| r.image_id == id && r.method == method)
            .map(|r| (fmt_psnr(r.psnr_db), fmt_ssim(r.ssim)))
            .unwrap_or_else(|| ("-".into(), "-".into()))
    };
    let rows: Vec<Vec<String>> = ids
        .iter()
        .map(|&id| {
            let (bp, bs) = cell(id, "bicubic");
            let (cp, cs) = cell(id, "coconet");
            let tang = TANG_PSNR
                .iter()
                .find(|(name, _)| *name == id)
                .map(|(_, v)| fmt_psnr(*v))
                .unwrap_or_else(|| "-".into());
            vec![id.to_owned(), bp, bs, tang, "-".into(), cp, cs]
        })
        .collect();
    let mut table = render_table(&header, &rows);
    table.push_str("* quoted from the original publication, not computed by this harness\n");
    table
}
