use std::path::Path;

use crate::{Error, Image, Result};

/// Reads a binary portable pixmap (`P6`, maxval 255). With the `png` feature,
/// `.png` files are decoded as 8-bit RGB as well.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(b"P6") {
        return decode_ppm(&bytes);
    }
    #[cfg(feature = "png")]
    if bytes.starts_with(b"\x89PNG") {
        return decode_png(&bytes);
    }
    Err(Error::format(
        0,
        format!("{}: unsupported image format", path.display()),
    ))
}

/// Writes `image` quantized to 8 bits; the extension picks the format
/// (`.ppm`, or `.png` with the `png` feature).
pub fn write_image(path: impl AsRef<Path>, image: &Image) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("ppm") => Ok(std::fs::write(path, encode_ppm(image))?),
        #[cfg(feature = "png")]
        Some("png") => {
            let buf = image::RgbImage::from_raw(
                image.width() as u32,
                image.height() as u32,
                image.to_rgb8(),
            )
            .ok_or_else(|| Error::invalid("image buffer size mismatch"))?;
            buf.save(path)
                .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
        }
        _ => Err(Error::invalid(format!(
            "{}: unsupported output format",
            path.display()
        ))),
    }
}

pub fn encode_ppm(image: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.to_rgb8());
    out
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(start as u64, format!("expected {what}")))
    }
}

pub fn decode_ppm(bytes: &[u8]) -> Result<Image> {
    if !bytes.starts_with(b"P6") {
        return Err(Error::format(0, "missing P6 magic"));
    }
    let mut header = HeaderReader { bytes, pos: 2 };
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval_at = header.pos as u64;
    let maxval = header.number("maxval")?;
    if maxval != 255 {
        return Err(Error::format(maxval_at, format!("maxval {maxval} unsupported, need 255")));
    }
    if !bytes.get(header.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format(header.pos as u64, "expected whitespace after header"));
    }
    let start = header.pos + 1;
    if width == 0 || height == 0 {
        return Err(Error::format(0, format!("empty image {width}x{height}")));
    }
    let needed = width * height * 3;
    let pixels = &bytes[start..];
    if pixels.len() < needed {
        return Err(Error::format(
            bytes.len() as u64,
            format!("pixel data truncated: need {needed} bytes, have {}", pixels.len()),
        ));
    }
    Image::from_rgb8(height, width, &pixels[..needed])
}

#[cfg(feature = "png")]
fn decode_png(bytes: &[u8]) -> Result<Image> {
    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::format(0, format!("png: {e}")))?
        .to_rgb8();
    let (w, h) = decoded.dimensions();
    Image::from_rgb8(h as usize, w as usize, decoded.as_raw())
}
