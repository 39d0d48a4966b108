use std::path::Path;

use crate::{Error, Image, Result};

const SIDE: usize = 32;
const PLANE: usize = SIDE * SIDE;
pub(crate) const RECORD_BYTES: usize = 1 + 3 * PLANE;
const MAX_RECORDS: usize = 10_000;

/// One labelled CIFAR-10 image.
#[derive(Debug, Clone, PartialEq)]
pub struct CifarRecord {
    pub image: Image,
    pub label: u8,
}

/// Reads a CIFAR-10 binary batch (e.g. `test_batch.bin`).
///
/// Each record is one label byte followed by the red, green and blue planes,
/// 1024 bytes each, row-major. Values are mapped to `[0, 1]` by `/ 255`.
pub fn load_cifar10_test(path: impl AsRef<Path>) -> Result<Vec<CifarRecord>> {
    let bytes = std::fs::read(path)?;
    parse_cifar_records(&bytes)
}

pub fn parse_cifar_records(bytes: &[u8]) -> Result<Vec<CifarRecord>> {
    if bytes.is_empty() {
        return Err(Error::format(0, "empty CIFAR-10 batch"));
    }
    let whole = bytes.len() / RECORD_BYTES;
    if !bytes.len().is_multiple_of(RECORD_BYTES) {
        return Err(Error::format(
            (whole * RECORD_BYTES) as u64,
            format!(
                "truncated record: {} trailing bytes, records are {RECORD_BYTES} bytes",
                bytes.len() % RECORD_BYTES
            ),
        ));
    }
    if whole > MAX_RECORDS {
        return Err(Error::format(
            (MAX_RECORDS * RECORD_BYTES) as u64,
            format!("batch holds {whole} records, at most {MAX_RECORDS} expected"),
        ));
    }
    bytes
        .chunks_exact(RECORD_BYTES)
        .enumerate()
        .map(|(i, record)| {
            let label = record[0];
            if label > 9 {
                return Err(Error::format(
                    (i * RECORD_BYTES) as u64,
                    format!("label {label} outside 0..=9"),
                ));
            }
            let planes = &record[1..];
            let mut data = Vec::with_capacity(3 * PLANE);
            for p in 0..PLANE {
                for c in 0..3 {
                    data.push(f64::from(planes[c * PLANE + p]) / 255.0);
                }
            }
            Ok(CifarRecord {
                image: Image::new(SIDE, SIDE, data)?,
                label,
            })
        })
        .collect()
}

/// Serializes 32x32 images into the CIFAR-10 binary layout.
pub fn encode_cifar_records(records: &[CifarRecord]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(records.len() * RECORD_BYTES);
    for (i, r) in records.iter().enumerate() {
        if r.image.dims() != (SIDE, SIDE) || r.label > 9 {
            return Err(Error::invalid(format!(
                "record {i}: CIFAR-10 needs a 32x32 image and a label in 0..=9"
            )));
        }
        out.push(r.label);
        let rgb = r.image.to_rgb8();
        for c in 0..3 {
            out.extend(rgb.iter().skip(c).step_by(3));
        }
    }
    Ok(out)
}
