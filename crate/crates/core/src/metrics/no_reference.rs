use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::ImageRgb;

/// Average gradient, edge intensity and information entropy of one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoReferenceScores {
    pub ag: f64,
    pub ei: f64,
    pub ie: f64,
}

/// Gradient metrics read luma on the 0-255 scale without padding: AG uses
/// forward differences over the top-left `(w-1) x (h-1)` pixels, EI the 3x3
/// Sobel magnitude over the interior.
pub fn simple_nr_metrics(image: &ImageRgb) -> Result<NoReferenceScores> {
    let (w, h) = image.dims();
    if w.min(h) < 3 {
        return Err(Error::TooSmall(format!(
            "no-reference metrics need at least 3x3, got {w}x{h}"
        )));
    }
    let y: Vec<f64> = image.luma().into_iter().map(|v| v * 255.0).collect();
    Ok(NoReferenceScores {
        ag: average_gradient(&y, w, h),
        ei: edge_intensity(&y, w, h),
        ie: entropy(&y),
    })
}

pub fn average_gradient(y: &[f64], w: usize, h: usize) -> f64 {
    let mut sum = 0.0;
    for r in 0..h - 1 {
        for c in 0..w - 1 {
            let v = y[r * w + c];
            let dx = y[r * w + c + 1] - v;
            let dy = y[(r + 1) * w + c] - v;
            sum += ((dx * dx + dy * dy) / 2.0).sqrt();
        }
    }
    sum / ((w - 1) * (h - 1)) as f64
}

pub fn edge_intensity(y: &[f64], w: usize, h: usize) -> f64 {
    let at = |c: usize, r: usize| y[r * w + c];
    let mut sum = 0.0;
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            let gx = (at(c + 1, r - 1) + 2.0 * at(c + 1, r) + at(c + 1, r + 1))
                - (at(c - 1, r - 1) + 2.0 * at(c - 1, r) + at(c - 1, r + 1));
            let gy = (at(c - 1, r + 1) + 2.0 * at(c, r + 1) + at(c + 1, r + 1))
                - (at(c - 1, r - 1) + 2.0 * at(c, r - 1) + at(c + 1, r - 1));
            sum += (gx * gx + gy * gy).sqrt();
        }
    }
    sum / ((w - 2) * (h - 2)) as f64
}

/// Shannon entropy in bits of the 256-bin histogram of rounded 0-255 values.
pub fn entropy(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let mut counts = [0usize; 256];
    for &v in y {
        counts[v.round().clamp(0.0, 255.0) as usize] += 1;
    }
    let n = y.len() as f64;
    counts
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let p = k as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}
