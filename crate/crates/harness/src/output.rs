//! Result files: per-image CSV records, aggregate CSV, plain-text tables and images.

use std::fmt::Write as _;
use std::path::{Component, Path, PathBuf};

use coconet::metrics::{Aggregate, MetricRecord, MetricsReport};
use coconet::Image;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const RECORDS_FILE: &str = "records.csv";
pub const AGGREGATES_FILE: &str = "aggregates.csv";
pub const TABLE_FILE: &str = "table.txt";

/// A directory that result files are confined to.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Path of `name` inside the directory. Only plain relative names are
    /// accepted, so nothing can be written outside the root.
    pub fn path(&self, name: &str) -> Result<PathBuf> {
        let rel = Path::new(name);
        let plain = !name.is_empty()
            && rel
                .components()
                .all(|c| matches!(c, Component::Normal(_)));
        if !plain {
            return Err(HarnessError::OutsideOutput(name.to_owned()));
        }
        Ok(self.root.join(rel))
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        Ok(std::fs::write(self.path(name)?, text)?)
    }

    pub fn write_image(&self, name: &str, image: &Image) -> Result<()> {
        Ok(coconet::dataio::write_image(self.path(name)?, image)?)
    }

    pub fn write_records(&self, report: &MetricsReport) -> Result<()> {
        let file = std::fs::File::create(self.path(RECORDS_FILE)?)?;
        write_records(file, report)
    }

    pub fn write_aggregates(&self, report: &MetricsReport) -> Result<()> {
        let file = std::fs::File::create(self.path(AGGREGATES_FILE)?)?;
        write_aggregates(file, &report.aggregates())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    image_id: String,
    method: String,
    sigma: Option<f64>,
    psnr_db: f64,
    ssim: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct AggregateRow {
    method: String,
    sigma: Option<f64>,
    count: usize,
    mean_psnr_db: f64,
    mean_ssim: f64,
}

/// Writes `image_id,method,sigma,psnr_db,ssim` rows; a missing sigma is an empty field.
pub fn write_records(out: impl std::io::Write, report: &MetricsReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &report.records {
        w.serialize(RecordRow {
            image_id: r.image_id.clone(),
            method: r.method.clone(),
            sigma: r.sigma,
            psnr_db: r.psnr_db,
            ssim: r.ssim,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(input: impl std::io::Read) -> Result<MetricsReport> {
    let mut report = MetricsReport::default();
    for row in csv::Reader::from_reader(input).deserialize() {
        let row: RecordRow = row?;
        report.push(MetricRecord {
            image_id: row.image_id,
            method: row.method,
            sigma: row.sigma,
            psnr_db: row.psnr_db,
            ssim: row.ssim,
        });
    }
    Ok(report)
}

pub fn write_aggregates(out: impl std::io::Write, aggregates: &[Aggregate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for a in aggregates {
        w.serialize(AggregateRow {
            method: a.method.clone(),
            sigma: a.sigma,
            count: a.count,
            mean_psnr_db: a.mean_psnr_db,
            mean_ssim: a.mean_ssim,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregates(input: impl std::io::Read) -> Result<Vec<Aggregate>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|row| {
            let row: AggregateRow = row?;
            Ok(Aggregate {
                method: row.method,
                sigma: row.sigma,
                count: row.count,
                mean_psnr_db: row.mean_psnr_db,
                mean_ssim: row.mean_ssim,
            })
        })
        .collect()
}

/// Fixed-width text table with a header row.
pub(crate) fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(s, "{cell:<w$}");
            } else {
                let _ = write!(s, " | {cell:>w$}");
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(header);
    let rule: usize = widths.iter().sum::<usize>() + 3 * (cols - 1);
    out.push_str(&"-".repeat(rule));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

pub(crate) fn fmt_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.2}")
    }
}

pub(crate) fn fmt_ssim(v: f64) -> String {
    format!("{v:.4}")
}
