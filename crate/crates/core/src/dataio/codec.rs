//! Encoded-image container.
//!
//! All integers are little-endian `u32` unless noted:
//!
//! ```text
//! magic        4 bytes  "CCN1"
//! version      u32
//! input_dim    u32
//! hidden_count u32
//! widths       u32 * hidden_count
//! output_dim   u32
//! source_h     u32
//! source_w     u32
//! tag_len      u16, then tag_len bytes of UTF-8 (feature convention)
//! final_loss   f64
//! payload      f64 per parameter; per layer W (row-major, fan_out x fan_in) then b
//! checksum     u32, CRC-32 of the payload bytes
//! ```

use std::path::Path;

use crate::coords::FEATURE_CONVENTION;
use crate::model::TrainedModel;
use crate::nn::{LayerParams, NetworkArch, NetworkParams};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"CCN1";
pub const FORMAT_VERSION: u32 = 1;

pub fn save_model(path: impl AsRef<Path>, model: &TrainedModel) -> Result<()> {
    Ok(std::fs::write(path, encode_model(model)?)?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    decode_model(&std::fs::read(path)?)
}

fn u32_field(value: usize, what: &str) -> Result<[u8; 4]> {
    u32::try_from(value)
        .map(u32::to_le_bytes)
        .map_err(|_| Error::invalid(format!("{what} {value} does not fit in 32 bits")))
}

pub fn encode_model(model: &TrainedModel) -> Result<Vec<u8>> {
    let arch = model.params.arch();
    let tag = model.feature_convention.as_bytes();
    let tag_len = u16::try_from(tag.len())
        .map_err(|_| Error::invalid("feature convention tag longer than 65535 bytes"))?;

    let mut out = Vec::with_capacity(64 + 8 * arch.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&u32_field(arch.input_dim, "input dimension")?);
    out.extend_from_slice(&u32_field(arch.hidden_widths.len(), "hidden layer count")?);
    for &w in &arch.hidden_widths {
        out.extend_from_slice(&u32_field(w, "hidden width")?);
    }
    out.extend_from_slice(&u32_field(arch.output_dim, "output dimension")?);
    out.extend_from_slice(&u32_field(model.source_height, "source height")?);
    out.extend_from_slice(&u32_field(model.source_width, "source width")?);
    out.extend_from_slice(&tag_len.to_le_bytes());
    out.extend_from_slice(tag);
    out.extend_from_slice(&model.final_loss.to_le_bytes());

    let payload_start = out.len();
    for v in model.params.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let checksum = crc32fast::hash(&out[payload_start..]);
    out.extend_from_slice(&checksum.to_le_bytes());
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::format(self.pos as u64, format!("file ends inside {what}"))),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        Ok(self.u32(what)? as usize)
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<TrainedModel> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4, "magic")? != MAGIC {
        return Err(Error::format(0, "not an encoded-image file (bad magic)"));
    }
    let version = cur.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let input_dim = cur.usize("input dimension")?;
    let hidden_count = cur.usize("hidden layer count")?;
    // each width takes 4 bytes; reject absurd counts before allocating
    if hidden_count > bytes.len() / 4 {
        return Err(Error::format(cur.pos as u64 - 4, "hidden layer count exceeds file size"));
    }
    let hidden_widths = (0..hidden_count)
        .map(|_| cur.usize("hidden widths"))
        .collect::<Result<Vec<_>>>()?;
    let output_dim = cur.usize("output dimension")?;
    let arch = NetworkArch {
        input_dim,
        hidden_widths,
        output_dim,
    };
    arch.validate()
        .map_err(|e| Error::format(cur.pos as u64, format!("invalid architecture: {e}")))?;
    let source_height = cur.usize("source height")?;
    let source_width = cur.usize("source width")?;
    if source_height == 0 || source_width == 0 {
        return Err(Error::format(cur.pos as u64, "source dimensions must be positive"));
    }
    let tag_len = u16::from_le_bytes(cur.take(2, "tag length")?.try_into().unwrap()) as usize;
    let tag_at = cur.pos as u64;
    let tag = std::str::from_utf8(cur.take(tag_len, "feature convention tag")?)
        .map_err(|_| Error::format(tag_at, "feature convention tag is not UTF-8"))?
        .to_owned();
    let final_loss = f64::from_le_bytes(cur.take(8, "final loss")?.try_into().unwrap());

    let expected = 8 * arch.param_count() as u64 + 4;
    let found = (bytes.len() - cur.pos) as u64;
    if found != expected {
        return Err(Error::PayloadLength { expected, found });
    }
    let payload = &bytes[cur.pos..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }
    if tag != FEATURE_CONVENTION {
        return Err(Error::ConventionMismatch {
            found: tag,
            expected: FEATURE_CONVENTION.to_owned(),
        });
    }

    let mut values = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()));
    let layers = arch
        .layer_shapes()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let weights: Vec<f64> = values.by_ref().take(fan_in * fan_out).collect();
            let biases: Vec<f64> = values.by_ref().take(fan_out).collect();
            LayerParams {
                fan_in,
                fan_out,
                weights,
                biases,
            }
        })
        .collect();
    let params = NetworkParams::from_layers(arch, layers)?;
    Ok(TrainedModel {
        params,
        source_height,
        source_width,
        feature_convention: tag,
        final_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(depth: usize, width: usize) -> TrainedModel {
        let params = NetworkParams::init(NetworkArch::uniform(depth, width), 3).unwrap();
        let mut m = TrainedModel::new(params, 57, 60);
        m.final_loss = 1.25e-3;
        m
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model(3, 7);
        let back = decode_model(&encode_model(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(back
            .params
            .values()
            .zip(m.params.values())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn file_size_follows_arch() {
        let m = model(10, 200);
        let bytes = encode_model(&m).unwrap();
        let params = 6 * 200 + 200 + 9 * (200 * 200 + 200) + 200 * 3 + 3;
        let header = 4 + 4 + 4 + 4 + 10 * 4 + 4 + 4 + 4 + 2 + FEATURE_CONVENTION.len() + 8;
        assert_eq!(bytes.len(), header + 8 * params + 4);
    }

    #[test]
    fn truncation_never_yields_a_model() {
        let bytes = encode_model(&model(2, 5)).unwrap();
        for cut in [0, 3, 10, 30, bytes.len() / 2, bytes.len() - 1] {
            let err = decode_model(&bytes[..cut]).unwrap_err();
            assert!(
                matches!(err, Error::Format { .. } | Error::PayloadLength { .. }),
                "cut {cut}: {err:?}"
            );
        }
    }

    #[test]
    fn corruption_detected() {
        let mut bytes = encode_model(&model(2, 5)).unwrap();
        let n = bytes.len();
        bytes[n - 20] ^= 0x40;
        assert!(matches!(decode_model(&bytes), Err(Error::ChecksumMismatch { .. })));
    }

    #[test]
    fn version_and_tag_checked() {
        let m = model(1, 4);
        let mut bytes = encode_model(&m).unwrap();
        bytes[4] = 9;
        assert!(matches!(
            decode_model(&bytes),
            Err(Error::VersionMismatch { found: 9, .. })
        ));
        let mut other = m.clone();
        other.feature_convention = "x1y1-only/v0".into();
        let bytes = encode_model(&other).unwrap();
        assert!(matches!(decode_model(&bytes), Err(Error::ConventionMismatch { .. })));
        assert!(matches!(decode_model(b"XXXX\x01\x00\x00\x00"), Err(Error::Format { .. })));
    }
}
