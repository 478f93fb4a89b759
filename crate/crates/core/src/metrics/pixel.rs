use crate::error::Result;
use crate::imaging::ImageRgb;

/// Mean squared error over all pixels and channels on the 0-255 scale.
pub fn mse(test: &ImageRgb, reference: &ImageRgb) -> Result<f64> {
    test.ensure_same_dims(reference)?;
    if test.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = test
        .pixels()
        .iter()
        .zip(reference.pixels())
        .flat_map(|(a, b)| (0..3).map(move |c| (a[c] - b[c]) * 255.0))
        .map(|d| d * d)
        .sum();
    Ok(sum / (3 * test.len()) as f64)
}

/// `10 log10(255^2 / MSE)` in decibels; `f64::INFINITY` for identical images.
pub fn psnr(test: &ImageRgb, reference: &ImageRgb) -> Result<f64> {
    Ok(psnr_from_mse(mse(test, reference)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    }
}
