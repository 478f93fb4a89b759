//! The sand-dust scattering model.
//!
//! A clear image `J` seen through dust of tint `A` and attenuation `beta` at
//! normalized depth `d` is rendered as
//!
//! ```text
//! t(x)  = exp(-beta * d(x))
//! I(x)  = (J(x) - (1 - A)) * t(x) + A
//! ```
//!
//! which factors into the intermediates `Jc = J + A - 1` (inherent color
//! deviation) and `Jd = Jc * t` (dust distribution), with `I = Jd + A`.
//! Intermediates are carried unclamped; the final image is clamped once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{clamp_unit, ColorDeviation, DepthMap, ImageRgb, RgbField};

/// Dust tint and attenuation for one synthesized image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterParams {
    pub a_s: ColorDeviation,
    pub beta: f64,
}

impl ScatterParams {
    pub fn new(a_s: ColorDeviation, beta: f64) -> Result<Self> {
        validate_beta(beta)?;
        Ok(Self { a_s, beta })
    }

    pub fn validate(&self) -> Result<()> {
        validate_beta(self.beta)
    }
}

fn validate_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "attenuation coefficient must satisfy 0 < beta <= 1, got {beta}"
        )));
    }
    Ok(())
}

/// Per-pixel transmission in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl TransmissionMap {
    /// Wraps precomputed transmission values; each must lie in `(0, 1]`.
    pub fn from_values(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "{width}x{height} transmission needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(v.is_finite() && **v > 0.0 && **v <= 1.0)) {
            return Err(Error::InvalidParameter(format!("transmission {v} outside (0, 1]")));
        }
        Ok(Self { width, height, data })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// `t = exp(-beta * d)` elementwise. Any finite `beta > 0` is accepted.
pub fn transmission_map(depth: &DepthMap, beta: f64) -> Result<TransmissionMap> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "attenuation coefficient must be finite and beta > 0, got {beta}"
        )));
    }
    Ok(TransmissionMap {
        width: depth.width(),
        height: depth.height(),
        data: depth
            .values()
            .iter()
            // exp underflows to 0 for huge beta*d; keep the (0, 1] invariant
            .map(|&d| (-beta * d).exp().max(f64::MIN_POSITIVE))
            .collect(),
    })
}

/// `Jc = J + A - 1`, unclamped.
pub fn inherent_deviation(clear: &ImageRgb, a_s: [f64; 3]) -> RgbField {
    let data = clear
        .pixels()
        .iter()
        .map(|px| std::array::from_fn(|c| px[c] + a_s[c] - 1.0))
        .collect();
    RgbField::new(clear.width(), clear.height(), data).expect("dimensions carried from a valid image")
}

/// `Jd = Jc * t`, the same transmission for all three channels.
pub fn apply_transmission(j_c: &RgbField, t: &TransmissionMap) -> Result<RgbField> {
    if j_c.dims() != t.dims() {
        return Err(Error::DimensionMismatch {
            left: format!("{}x{}", j_c.width(), j_c.height()),
            right: format!("{}x{}", t.width, t.height),
        });
    }
    let data = j_c
        .pixels()
        .iter()
        .zip(&t.data)
        .map(|(px, &tv)| px.map(|v| v * tv))
        .collect();
    RgbField::new(j_c.width(), j_c.height(), data)
}

/// Pre-clamp dusty radiance `I = (J - A') t + A` with `A' = 1 - A`.
///
/// Evaluated as `J t + (A - A' t)` so that `t = 1` with `A = 0.5` returns `J`
/// bit-for-bit and `t -> 0` converges exactly on `A`.
pub fn dust_radiance(clear: &ImageRgb, t: &TransmissionMap, a_s: [f64; 3]) -> Result<RgbField> {
    if clear.dims() != t.dims() {
        return Err(Error::DimensionMismatch {
            left: format!("image {}", clear.shape_str()),
            right: format!("transmission {}x{}", t.width, t.height),
        });
    }
    let complement = a_s.map(|a| 1.0 - a);
    let data = clear
        .pixels()
        .iter()
        .zip(&t.data)
        .map(|(px, &tv)| std::array::from_fn(|c| px[c] * tv + (a_s[c] - complement[c] * tv)))
        .collect();
    RgbField::new(clear.width(), clear.height(), data)
}

/// Clamped dusty image plus clipping statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub image: ImageRgb,
    pub pre_clamp_min: [f64; 3],
    pub pre_clamp_max: [f64; 3],
    /// Fraction of channel samples that fell outside `[0, 1]` before clamping.
    pub clip_fraction: f64,
}

/// Clamps a pre-clamp field into an image, recording extrema and clip fraction.
pub fn clamp_field(field: &RgbField) -> SynthesisResult {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    let mut clipped = 0usize;
    let data: Vec<[f64; 3]> = field
        .pixels()
        .iter()
        .map(|px| {
            for c in 0..3 {
                lo[c] = lo[c].min(px[c]);
                hi[c] = hi[c].max(px[c]);
                if !(0.0..=1.0).contains(&px[c]) {
                    clipped += 1;
                }
            }
            px.map(clamp_unit)
        })
        .collect();
    let samples = data.len() * 3;
    if samples == 0 {
        lo = [0.0; 3];
        hi = [0.0; 3];
    }
    SynthesisResult {
        image: ImageRgb::new(field.width(), field.height(), data).expect("clamped values are in range"),
        pre_clamp_min: lo,
        pre_clamp_max: hi,
        clip_fraction: if samples == 0 {
            0.0
        } else {
            clipped as f64 / samples as f64
        },
    }
}

/// Renders `clear` through dust described by `params` at the given depth.
pub fn synthesize(clear: &ImageRgb, depth: &DepthMap, params: &ScatterParams) -> Result<SynthesisResult> {
    params.validate()?;
    if clear.dims() != depth.dims() {
        return Err(Error::DimensionMismatch {
            left: format!("image {}", clear.shape_str()),
            right: format!("depth {}", depth.shape_str()),
        });
    }
    let t = transmission_map(depth, params.beta)?;
    let field = dust_radiance(clear, &t, params.a_s.channels())?;
    Ok(clamp_field(&field))
}
