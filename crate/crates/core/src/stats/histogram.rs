use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imaging::ImageRgb;

/// Per-channel normalized histograms and moments of an RGB image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramSet {
    pub bins: usize,
    /// `freq[c][i]` is the fraction of channel-`c` samples in bin `i`.
    pub freq: [Vec<f64>; 3],
    pub mean: [f64; 3],
    /// Population standard deviation.
    pub std_dev: [f64; 3],
    /// Central 95% interval `(2.5th, 97.5th)` percentile, nearest rank.
    pub central_95: [(f64, f64); 3],
}

/// Uniform-width binning of `[0, 1]`; a value of exactly 1.0 falls in the last bin.
pub fn bin_index(v: f64, bins: usize) -> usize {
    ((v * bins as f64) as usize).min(bins - 1)
}

pub fn channel_histograms(image: &ImageRgb, bins: usize) -> Result<HistogramSet> {
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "histogram needs at least 2 bins, got {bins}"
        )));
    }
    if image.is_empty() {
        return Err(Error::EmptyInput("histogram of an empty image".into()));
    }
    let n = image.len() as f64;
    let mut counts = [vec![0usize; bins], vec![0usize; bins], vec![0usize; bins]];
    for px in image.pixels() {
        for c in 0..3 {
            counts[c][bin_index(px[c], bins)] += 1;
        }
    }
    let freq = counts.map(|ch| ch.into_iter().map(|k| k as f64 / n).collect::<Vec<_>>());
    let mean = channel_means(image);
    let std_dev = channel_std(image, mean);
    let central_95 = std::array::from_fn(|c| {
        let mut values: Vec<f64> = image.pixels().iter().map(|px| px[c]).collect();
        values.sort_by(f64::total_cmp);
        (percentile(&values, 2.5), percentile(&values, 97.5))
    });
    Ok(HistogramSet {
        bins,
        freq,
        mean,
        std_dev,
        central_95,
    })
}

pub(crate) fn channel_means(image: &ImageRgb) -> [f64; 3] {
    let Some(first) = image.pixels().first().copied() else {
        return [0.0; 3];
    };
    // accumulate offsets from the first pixel so constant channels are exact
    let n = image.len() as f64;
    let mut sum = [0.0; 3];
    for px in image.pixels() {
        for c in 0..3 {
            sum[c] += px[c] - first[c];
        }
    }
    std::array::from_fn(|c| first[c] + sum[c] / n)
}

pub(crate) fn channel_std(image: &ImageRgb, mean: [f64; 3]) -> [f64; 3] {
    let n = image.len().max(1) as f64;
    let mut acc = [0.0; 3];
    for px in image.pixels() {
        for c in 0..3 {
            let d = px[c] - mean[c];
            acc[c] += d * d;
        }
    }
    acc.map(|s| (s / n).sqrt())
}

// nearest-rank percentile of sorted data
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

impl HistogramSet {
    /// `bin_index,freq_r,freq_g,freq_b` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_index,freq_r,freq_g,freq_b\n");
        for i in 0..self.bins {
            let _ = writeln!(out, "{i},{},{},{}", self.freq[0][i], self.freq[1][i], self.freq[2][i]);
        }
        out
    }
}
