use crate::error::{Error, Result};
use crate::imaging::ImageRgb;

/// Snaps each channel to the nearest of `levels` uniformly spaced values in `[0, 1]`.
pub fn color_quantize(image: &ImageRgb, levels: usize) -> Result<ImageRgb> {
    if !(2..=256).contains(&levels) {
        return Err(Error::InvalidParameter(format!(
            "quantization levels must be in [2, 256], got {levels}"
        )));
    }
    let steps = (levels - 1) as f64;
    Ok(image.map(|px| px.map(|v| (v * steps + 0.5).floor() / steps)))
}
