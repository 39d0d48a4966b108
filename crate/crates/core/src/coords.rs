//! Pixel locations as network inputs.
//!
//! Every location is described in three frames at once: Cartesian with the
//! origin at the top-left corner, Cartesian with the origin at the
//! bottom-right corner, and polar around the image centre. All six values are
//! normalized to `[0, 1]`:
//!
//! - `x1 = col / (width - 1)`, `y1 = row / (height - 1)` (a length-1 axis uses 0.5)
//! - `x2 = 1 - x1`, `y2 = 1 - y1`
//! - `r` = distance to `((height-1)/2, (width-1)/2)` over the half diagonal
//! - `theta = (atan2(row - cr, col - cc) + pi) / (2 pi)`, and 0 at the centre
//!
//! Fractional locations are allowed, which is what makes resampling at a new
//! resolution a matter of evaluating a denser grid.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Identifier of the featurization above, stored in encoded-model files.
pub const FEATURE_CONVENTION: &str = "x1y1x2y2-r-theta/align-corners/v1";

/// Feature vector of one location, in network input order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordFeature {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub r: f64,
    pub theta: f64,
}

impl CoordFeature {
    pub const DIM: usize = 6;

    pub fn to_array(self) -> [f64; 6] {
        [self.x1, self.y1, self.x2, self.y2, self.r, self.theta]
    }
}

fn axis_coordinate(pos: f64, len: usize) -> f64 {
    if len == 1 {
        0.5
    } else {
        pos / (len - 1) as f64
    }
}

/// Featurizes a (possibly fractional) location of a `height x width` image.
pub fn featurize(row: f64, col: f64, height: usize, width: usize) -> Result<CoordFeature> {
    if height == 0 || width == 0 {
        return Err(Error::invalid(format!(
            "image dimensions must be positive, got {height}x{width}"
        )));
    }
    if !row.is_finite() || !col.is_finite() {
        return Err(Error::invalid("non-finite pixel location"));
    }
    let x1 = axis_coordinate(col, width);
    let y1 = axis_coordinate(row, height);

    let center_row = (height - 1) as f64 / 2.0;
    let center_col = (width - 1) as f64 / 2.0;
    let dr = row - center_row;
    let dc = col - center_col;
    let half_diagonal = center_row.hypot(center_col);
    let dist = dr.hypot(dc);
    let (r, theta) = if dist == 0.0 || half_diagonal == 0.0 {
        (0.0, 0.0)
    } else {
        (dist / half_diagonal, (dr.atan2(dc) + PI) / (2.0 * PI))
    };

    Ok(CoordFeature {
        x1,
        y1,
        x2: 1.0 - x1,
        y2: 1.0 - y1,
        r,
        theta,
    })
}

/// One training location: its features and integer position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub feature: CoordFeature,
    pub row: usize,
    pub col: usize,
}

/// Features of every integer pixel location, row-major.
pub fn training_grid(height: usize, width: usize) -> Result<Vec<GridPoint>> {
    let mut points = Vec::with_capacity(height * width);
    for row in 0..height {
        for col in 0..width {
            points.push(GridPoint {
                feature: featurize(row as f64, col as f64, height, width)?,
                row,
                col,
            });
        }
    }
    Ok(points)
}

/// Source image size and the size of the grid to evaluate it on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub source_height: usize,
    pub source_width: usize,
    pub out_height: usize,
    pub out_width: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.source_height == 0
            || self.source_width == 0
            || self.out_height == 0
            || self.out_width == 0
        {
            return Err(Error::invalid(format!("grid dimensions must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Source-frame position of output sample `i` on an align-corners grid.
///
/// Endpoints of both grids coincide; a single output sample sits at the centre.
pub fn source_position(i: usize, source_len: usize, out_len: usize) -> f64 {
    if out_len == 1 {
        (source_len - 1) as f64 / 2.0
    } else {
        (i * (source_len - 1)) as f64 / (out_len - 1) as f64
    }
}

/// Features of an `out_height x out_width` grid spanning the source frame.
pub fn resample_grid(spec: GridSpec) -> Result<Vec<CoordFeature>> {
    spec.validate()?;
    let mut features = Vec::with_capacity(spec.out_height * spec.out_width);
    for i in 0..spec.out_height {
        let row = source_position(i, spec.source_height, spec.out_height);
        for j in 0..spec.out_width {
            let col = source_position(j, spec.source_width, spec.out_width);
            features.push(featurize(row, col, spec.source_height, spec.source_width)?);
        }
    }
    Ok(features)
}

/// Flattens features into a row-major `(n, 6)` network input buffer.
pub fn flatten(features: impl IntoIterator<Item = CoordFeature>) -> Vec<f64> {
    features.into_iter().flat_map(CoordFeature::to_array).collect()
}
