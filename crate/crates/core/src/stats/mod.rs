//! Color statistics of sandstorm imagery.

mod histogram;
mod kmeans;
mod priors;
mod quantize;

pub use histogram::{bin_index, channel_histograms, HistogramSet};
pub use kmeans::{
    chroma_line_residual, cluster_linearity, dist2, distinct_count, kmeans_lab, lab_samples, nearest, ClusterResult,
    KmeansConfig, Lab,
};
pub use priors::{prior_characteristics, PriorReport, PriorThresholds};
pub use quantize::color_quantize;

use crate::error::Result;
use crate::imaging::ImageRgb;

/// Default cap on the number of pixels fed to k-means.
pub const DEFAULT_SAMPLE_CAP: usize = 50_000;

/// Clusters the colors of `image` in LAB, optionally after per-channel
/// quantization to `levels`.
pub fn image_clusters(
    image: &ImageRgb,
    levels: Option<usize>,
    sample_cap: usize,
    config: &KmeansConfig,
) -> Result<ClusterResult> {
    let samples = match levels {
        Some(l) => lab_samples(&color_quantize(image, l)?, sample_cap, config.seed),
        None => lab_samples(image, sample_cap, config.seed),
    };
    kmeans_lab(&samples, config)
}
