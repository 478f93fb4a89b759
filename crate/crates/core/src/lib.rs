//! Sand-dust image synthesis and evaluation.
//!
//! * [`imaging`] has pixel buffers, sRGB to CIELAB and PNG/PPM/PFM I/O.
//! * [`synthesis`] has the dust scattering model, parameter sampling and
//!   reproducible dataset builds.
//! * [`stats`] has channel histograms, sandstorm prior checks, color
//!   quantization and LAB k-means.
//! * [`metrics`] has full-reference (MSE, PSNR, SSIM, FSIMc, CIE94,
//!   CIEDE2000) and simple no-reference (AG, EI, IE) quality metrics.
//! * [`scenes`] generates seeded synthetic test scenes with matching depth.

pub mod error;
pub mod imaging;
pub mod metrics;
pub mod scenes;
pub mod stats;
pub mod synthesis;

pub use error::{Error, Result};
