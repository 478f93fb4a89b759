//! Pixel buffers.
//!
//! All buffers are row-major. RGB pixels are stored as `[r, g, b]` triples of
//! normalized intensities; [`ImageRgb`] guarantees every channel is finite and
//! inside `[0, 1]`, while [`RgbField`] carries unclamped intermediates.

use crate::error::{shape, Error, Result};

/// An RGB image with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRgb {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl ImageRgb {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        check_len(width, height, data.len())?;
        if let Some((i, px)) = data
            .iter()
            .enumerate()
            .find(|(_, px)| px.iter().any(|v| !v.is_finite() || !(0.0..=1.0).contains(v)))
        {
            return Err(Error::InvalidImage(format!("pixel {i} = {px:?} outside [0, 1]")));
        }
        Ok(Self { width, height, data })
    }

    /// Builds an image from a per-pixel function of `(x, y)`; values are clamped.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).map(clamp_unit));
            }
        }
        Self { width, height, data }
    }

    pub fn filled(width: usize, height: usize, px: [f64; 3]) -> Result<Self> {
        Self::new(width, height, vec![px; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    pub fn into_pixels(self) -> Vec<[f64; 3]> {
        self.data
    }

    /// Applies `f` to every pixel and clamps the result back into `[0, 1]`.
    pub fn map(&self, mut f: impl FnMut([f64; 3]) -> [f64; 3]) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&px| f(px).map(clamp_unit)).collect(),
        }
    }

    /// ITU-R BT.601 luma plane, same scale as the channels.
    pub fn luma(&self) -> Vec<f64> {
        self.data.iter().map(|&px| luma(px)).collect()
    }

    pub fn shape_str(&self) -> String {
        shape(self.width, self.height)
    }

    pub fn ensure_same_dims(&self, other: &ImageRgb) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.shape_str(),
                right: other.shape_str(),
            });
        }
        Ok(())
    }
}

pub fn luma(px: [f64; 3]) -> f64 {
    0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]
}

pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// RGB values that may leave `[0, 1]`, such as the intermediates of the
/// scattering model before the final clamp.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbField {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl RgbField {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        check_len(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }
}

impl From<&ImageRgb> for RgbField {
    fn from(img: &ImageRgb) -> Self {
        Self {
            width: img.width,
            height: img.height,
            data: img.data.clone(),
        }
    }
}

/// Normalized scene depth in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_len(width, height, data.len())?;
        if let Some((i, v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || !(0.0..=1.0).contains(*v))
        {
            return Err(Error::InvalidDepth(format!("sample {i} = {v} outside [0, 1]")));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(clamp_unit(f(x, y)));
            }
        }
        Self { width, height, data }
    }

    /// Min-max rescales arbitrary finite samples into `[0, 1]`.
    /// A constant map becomes all zeros.
    pub fn normalized(width: usize, height: usize, raw: &[f64]) -> Result<Self> {
        check_len(width, height, raw.len())?;
        if let Some(v) = raw.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDepth(format!("non-finite sample {v}")));
        }
        let (lo, hi) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        let span = hi - lo;
        let data = if raw.is_empty() || span <= 0.0 {
            vec![0.0; raw.len()]
        } else {
            raw.iter().map(|&v| ((v - lo) / span).clamp(0.0, 1.0)).collect()
        };
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn shape_str(&self) -> String {
        shape(self.width, self.height)
    }
}

/// CIELAB pixels `[L, a, b]`, D65 reference white.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageLab {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl ImageLab {
    pub(crate) fn from_parts(width: usize, height: usize, data: Vec<[f64; 3]>) -> Self {
        debug_assert_eq!(width * height, data.len());
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }
}

fn check_len(width: usize, height: usize, len: usize) -> Result<()> {
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::InvalidImage(format!("dimensions {width}x{height} overflow")))?;
    if expected != len {
        return Err(Error::InvalidImage(format!(
            "{width}x{height} needs {expected} pixels, got {len}"
        )));
    }
    Ok(())
}
