use crate::coords::source_position;
use crate::{Error, Image, Result};

/// Cubic convolution parameter of the Catmull-Rom kernel.
pub const CATMULL_ROM_A: f64 = -0.5;

/// Keys cubic convolution kernel with parameter `a`.
pub fn cubic_weight(d: f64, a: f64) -> f64 {
    let d = d.abs();
    if d <= 1.0 {
        ((a + 2.0) * d - (a + 3.0)) * d * d + 1.0
    } else if d < 2.0 {
        ((a * d - 5.0 * a) * d + 8.0 * a) * d - 4.0 * a
    } else {
        0.0
    }
}

/// Four source taps and weights for each output position along one axis.
fn axis_taps(source_len: usize, out_len: usize) -> Vec<([usize; 4], [f64; 4])> {
    (0..out_len)
        .map(|i| {
            let x = source_position(i, source_len, out_len);
            let base = x.floor();
            let t = x - base;
            let base = base as isize;
            let mut idx = [0usize; 4];
            let mut w = [0.0; 4];
            for k in 0..4 {
                let offset = k as isize - 1;
                idx[k] = (base + offset).clamp(0, source_len as isize - 1) as usize;
                w[k] = cubic_weight(t - offset as f64, CATMULL_ROM_A);
            }
            (idx, w)
        })
        .collect()
}

/// Separable Catmull-Rom resampling on the align-corners grid, replicate
/// edges, output clamped to `[0, 1]`.
pub fn bicubic_resize(image: &Image, out_height: usize, out_width: usize) -> Result<Image> {
    if out_height == 0 || out_width == 0 {
        return Err(Error::invalid(format!(
            "output dimensions must be positive, got {out_height}x{out_width}"
        )));
    }
    let (h, w) = image.dims();
    if (h, w) == (out_height, out_width) {
        return Ok(image.clone());
    }
    let cols = axis_taps(w, out_width);
    let rows = axis_taps(h, out_height);
    let src = image.as_slice();

    // horizontal pass: h x out_width x 3
    let mut horizontal = vec![0.0; h * out_width * 3];
    for r in 0..h {
        for (j, (idx, wt)) in cols.iter().enumerate() {
            for ch in 0..3 {
                horizontal[(r * out_width + j) * 3 + ch] = (0..4)
                    .map(|k| wt[k] * src[(r * w + idx[k]) * 3 + ch])
                    .sum();
            }
        }
    }
    let mut out = vec![0.0; out_height * out_width * 3];
    for (i, (idx, wt)) in rows.iter().enumerate() {
        for j in 0..out_width {
            for ch in 0..3 {
                out[(i * out_width + j) * 3 + ch] = (0..4)
                    .map(|k| wt[k] * horizontal[(idx[k] * out_width + j) * 3 + ch])
                    .sum();
            }
        }
    }
    Ok(Image::from_clamped(out_height, out_width, out))
}

/// Low-resolution input for the upsampling experiments: bicubic resize to
/// `(ceil(h / factor), ceil(w / factor))`.
pub fn benchmark_downsample(image: &Image, factor: usize) -> Result<Image> {
    if factor < 2 {
        return Err(Error::invalid(format!("downsampling factor must be >= 2, got {factor}")));
    }
    let (h, w) = image.dims();
    bicubic_resize(image, h.div_ceil(factor), w.div_ceil(factor))
}
