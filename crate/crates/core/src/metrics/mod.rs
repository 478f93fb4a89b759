//! Full-reference and simple no-reference image quality metrics.

mod delta_e;
mod fsim;
mod no_reference;
mod pixel;
mod report;
mod ssim;

pub use delta_e::{cie94, ciede2000, color_difference, delta_e, DeltaEFormula};
pub use fsim::{fsim, fsim_scores, fsimc, FsimConfig, FsimScores, FSIM_MIN_SIDE};
pub use no_reference::{average_gradient, edge_intensity, entropy, simple_nr_metrics, NoReferenceScores};
pub use pixel::{mse, psnr, psnr_from_mse};
pub use report::{
    evaluate_images, evaluate_pairs, format_value, EvalConfig, Metric, MetricReport, MetricRow, MetricValues, PairList,
    PairSpec,
};
pub use ssim::{ssim, ssim_plane, SsimConfig};
