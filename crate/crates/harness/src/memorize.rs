use std::path::Path;

use coconet::dataio::{load_cifar10_test, read_image};
use coconet::metrics::psnr;
use coconet::model::{train, Snapshot, TrainConfig};
use coconet::Image;

use crate::error::{HarnessError, Result};
use crate::output::{fmt_psnr, render_table, OutputDir, TABLE_FILE};

pub const DEFAULT_SNAPSHOTS: [usize; 5] = [0, 10, 100, 1000, 3000];
pub const CURVE_FILE: &str = "psnr_curve.csv";

#[derive(Debug, Clone)]
pub struct MemorizeReport {
    pub snapshots: Vec<Snapshot>,
    /// `(epoch, PSNR vs the input)` per snapshot.
    pub curve: Vec<(usize, f64)>,
    pub loss_history: Vec<f64>,
    pub table: String,
}

/// Reads an image file, or record `cifar_index` when the path is a CIFAR-10 batch.
pub fn load_input(path: &Path, cifar_index: Option<usize>) -> Result<Image> {
    let dataset = |e: coconet::Error| HarnessError::Dataset(format!("{}: {e}", path.display()));
    match cifar_index {
        Some(i) => {
            let records = load_cifar10_test(path).map_err(dataset)?;
            records.into_iter().nth(i).map(|r| r.image).ok_or_else(|| {
                HarnessError::Dataset(format!("{}: no record {i}", path.display()))
            })
        }
        None => read_image(path).map_err(dataset),
    }
}

/// Trains on `image` and captures reconstructions at `config.snapshot_epochs`
/// (every listed epoch up to `config.epochs`).
pub fn run_memorize_demo(
    image: &Image,
    config: &TrainConfig,
    output: Option<&OutputDir>,
) -> Result<MemorizeReport> {
    let outcome = train(image, None, config)?;
    let curve = outcome
        .snapshots
        .iter()
        .map(|s| Ok((s.epoch, psnr(image, &s.image)?)))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|(e, p)| vec![e.to_string(), fmt_psnr(*p)])
        .collect();
    let table = render_table(&["Epoch".into(), "PSNR".into()], &rows);
    if let Some(out) = output {
        out.write_image("input.ppm", image)?;
        for s in &outcome.snapshots {
            out.write_image(&format!("epoch_{:05}.ppm", s.epoch), &s.image)?;
        }
        let mut w = csv::Writer::from_path(out.path(CURVE_FILE)?)?;
        w.write_record(["epoch", "psnr_db"])?;
        for (e, p) in &curve {
            w.write_record([e.to_string(), p.to_string()])?;
        }
        w.flush()?;
        out.write_text(TABLE_FILE, &table)?;
    }
    Ok(MemorizeReport {
        snapshots: outcome.snapshots,
        curve,
        loss_history: outcome.loss_history,
        table,
    })
}
