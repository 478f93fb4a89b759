//! Pixel buffers, color conversion and raster I/O.

mod buffer;
mod color;
mod io;

pub(crate) use buffer::clamp_unit;
pub use buffer::{luma, DepthMap, ImageLab, ImageRgb, RgbField};
pub use color::{rgb_to_lab, srgb_to_lab, srgb_to_linear, ColorDeviation};
pub use io::{load_depth, load_image, quantize_u16, quantize_u8, read_pfm, save_depth_png16, save_image, save_pfm};
