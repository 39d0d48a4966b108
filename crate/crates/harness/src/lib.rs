//! Benchmark orchestration for coordinate-to-color networks: denoising on
//! CIFAR-10, 4x upsampling and patch completion on Set5, and memorization
//! snapshots. Each run writes per-image metric records, aggregate means, a
//! plain-text table and result images into one output directory.

pub mod complete;
pub mod denoise;
mod error;
pub mod memorize;
pub mod output;
pub mod run;
pub mod upsample;

pub use complete::{run_completion_demo, CompletionRecord, CompletionReport};
pub use denoise::{denoise_images, run_denoise_benchmark};
pub use error::{HarnessError, Result};
pub use memorize::{run_memorize_demo, MemorizeReport};
pub use output::OutputDir;
pub use run::{derive_seed, BenchmarkRun, Experiment, Method, TrainOverrides};
pub use upsample::{run_upsample_benchmark, upsample_images, TANG_PSNR};

use coconet::metrics::{MetricRecord, MetricsReport};

/// An image left out of the aggregates because its training diverged.
#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub image_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub metrics: MetricsReport,
    pub excluded: Vec<Exclusion>,
    pub table: String,
}

pub(crate) enum ImageOutcome {
    Scored(Vec<MetricRecord>),
    Diverged { image_id: String, reason: String },
}

/// Concatenates per-image outcomes in index order. Diverged images are
/// dropped with a warning; more than 5% of them fails the run.
pub(crate) fn merge_outcomes(
    outcomes: Vec<Result<ImageOutcome>>,
    total: usize,
) -> Result<BenchmarkReport> {
    let mut metrics = MetricsReport::default();
    let mut excluded = Vec::new();
    for outcome in outcomes {
        match outcome? {
            ImageOutcome::Scored(records) => metrics.records.extend(records),
            ImageOutcome::Diverged { image_id, reason } => {
                log::warn!("excluding image {image_id}: {reason}");
                excluded.push(Exclusion { image_id, reason });
            }
        }
    }
    if excluded.len() * 20 > total {
        return Err(HarnessError::DivergenceRate {
            diverged: excluded.len(),
            total,
        });
    }
    Ok(BenchmarkReport {
        metrics,
        excluded,
        table: String::new(),
    })
}
