//! Raster readers and writers: PNG (8/16-bit), PPM (P3/P6) and PFM.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};

use super::buffer::{DepthMap, ImageRgb};
use crate::error::{Error, Result};

/// Quantizes a normalized channel to a byte with round-half-up.
pub fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

pub fn quantize_u16(v: f64) -> u16 {
    (v.clamp(0.0, 1.0) * 65535.0 + 0.5).floor() as u16
}

fn ensure_exists(path: &Path) -> Result<()> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(())
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn decode_raster(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path)
        .and_then(|r| r.with_guessed_format())
        .map_err(|e| Error::CorruptHeader {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Pnm) => {}
        Some(other) => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("{other:?} is not supported, use PNG or PPM"),
            })
        }
        None => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: "unrecognized file signature".into(),
            })
        }
    }
    reader.decode().map_err(|e| match e {
        image::ImageError::Unsupported(u) => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: u.to_string(),
        },
        other => Error::CorruptHeader {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })
}

fn is_wide(img: &DynamicImage) -> bool {
    matches!(
        img,
        DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
            | DynamicImage::ImageRgb16(_)
            | DynamicImage::ImageRgba16(_)
    )
}

/// Loads an RGB raster; 8-bit samples map by `v / 255`, 16-bit by `v / 65535`.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageRgb> {
    let path = path.as_ref();
    ensure_exists(path)?;
    let img = decode_raster(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<[f64; 3]> = if is_wide(&img) {
        img.to_rgb16()
            .pixels()
            .map(|p| p.0.map(|v| f64::from(v) / 65535.0))
            .collect()
    } else if matches!(img, DynamicImage::ImageRgb32F(_) | DynamicImage::ImageRgba32F(_)) {
        img.to_rgb32f()
            .pixels()
            .map(|p| p.0.map(|v| f64::from(v).clamp(0.0, 1.0)))
            .collect()
    } else {
        img.to_rgb8()
            .pixels()
            .map(|p| p.0.map(|v| f64::from(v) / 255.0))
            .collect()
    };
    ImageRgb::new(w, h, data)
}

/// Writes an 8-bit RGB raster. The container follows the extension
/// (`.ppm`/`.pnm` for binary PPM, PNG otherwise).
pub fn save_image(image: &ImageRgb, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if image.width() == 0 || image.height() == 0 {
        return Err(Error::InvalidImage(format!(
            "cannot save an empty {} image",
            image.shape_str()
        )));
    }
    let bytes: Vec<u8> = image.pixels().iter().flat_map(|px| px.map(quantize_u8)).collect();
    let (w, h) = (image.width() as u32, image.height() as u32);
    let written = if has_extension(path, "ppm") || has_extension(path, "pnm") {
        fs::File::create(path)
            .map_err(image::ImageError::IoError)
            .and_then(|f| {
                PnmEncoder::new(BufWriter::new(f))
                    .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
                    .write_image(&bytes, w, h, ExtendedColorType::Rgb8)
            })
    } else {
        image::save_buffer_with_format(path, &bytes, w, h, ExtendedColorType::Rgb8, ImageFormat::Png)
    };
    written.map_err(|e| Error::Write {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn is_pfm(path: &Path) -> Result<bool> {
    let mut head = [0u8; 2];
    let n = fs::File::open(path)?.read(&mut head)?;
    Ok(matches!(&head[..n], b"Pf" | b"PF") || has_extension(path, "pfm"))
}

/// Loads a depth map from a single-channel PNG (8 or 16-bit) or a grayscale PFM.
///
/// With `normalize` the samples are min-max rescaled into `[0, 1]`; otherwise
/// they must already lie there.
pub fn load_depth(path: impl AsRef<Path>, normalize: bool) -> Result<DepthMap> {
    let path = path.as_ref();
    ensure_exists(path)?;
    let (w, h, raw) = if is_pfm(path)? {
        read_pfm(path)?
    } else {
        let img = decode_raster(path)?;
        let (w, h) = (img.width() as usize, img.height() as usize);
        let raw: Vec<f64> = match &img {
            DynamicImage::ImageLuma16(buf) => buf.pixels().map(|p| f64::from(p.0[0]) / 65535.0).collect(),
            DynamicImage::ImageLuma8(buf) => buf.pixels().map(|p| f64::from(p.0[0]) / 255.0).collect(),
            other => {
                return Err(Error::UnsupportedFormat {
                    path: path.to_path_buf(),
                    reason: format!("depth must be single-channel, found {:?}", other.color()),
                })
            }
        };
        (w, h, raw)
    };
    if normalize {
        DepthMap::normalized(w, h, &raw)
    } else {
        DepthMap::new(w, h, raw)
    }
}

/// Writes a depth map as a 16-bit grayscale PNG.
pub fn save_depth_png16(depth: &DepthMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let samples: Vec<u16> = depth.values().iter().map(|&v| quantize_u16(v)).collect();
    let buf = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(depth.width() as u32, depth.height() as u32, samples)
        .ok_or_else(|| Error::InvalidDepth("buffer size mismatch".into()))?;
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| write_err(path, e))
}

fn write_err(path: &Path, e: impl ToString) -> Error {
    Error::Write {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

/// Writes single-channel float samples as little-endian PFM (bottom row first).
pub fn save_pfm(width: usize, height: usize, values: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if values.len() != width * height {
        return Err(Error::InvalidDepth(format!(
            "{width}x{height} needs {} samples, got {}",
            width * height,
            values.len()
        )));
    }
    let file = fs::File::create(path).map_err(|e| write_err(path, e))?;
    let mut out = BufWriter::new(file);
    let mut body = Vec::with_capacity(values.len() * 4 + 32);
    write!(body, "Pf\n{width} {height}\n-1.0\n")?;
    for row in (0..height).rev() {
        for &v in &values[row * width..(row + 1) * width] {
            body.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out.write_all(&body)
        .and_then(|_| out.flush())
        .map_err(|e| write_err(path, e))
}

/// Reads a grayscale PFM, returning `(width, height, samples)` in top-down order.
pub fn read_pfm(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<f64>)> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let corrupt = |reason: &str| Error::CorruptHeader {
        path: PathBuf::from(path),
        reason: reason.to_string(),
    };

    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(corrupt("truncated PFM header"));
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| corrupt("non-ASCII PFM header"))?);
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;

    match tokens[0] {
        "Pf" => {}
        "PF" => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: "color PFM cannot be used as depth".into(),
            })
        }
        _ => return Err(corrupt("missing Pf signature")),
    }
    let width: usize = tokens[1].parse().map_err(|_| corrupt("bad PFM width"))?;
    let height: usize = tokens[2].parse().map_err(|_| corrupt("bad PFM height"))?;
    let scale: f64 = tokens[3].parse().map_err(|_| corrupt("bad PFM scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(corrupt("PFM scale must be finite and nonzero"));
    }
    let little_endian = scale < 0.0;
    let needed = width * height * 4;
    let raster = bytes
        .get(pos..pos + needed)
        .ok_or_else(|| corrupt("PFM raster shorter than header dimensions"))?;

    let mut values = vec![0.0; width * height];
    for (i, chunk) in raster.chunks_exact(4).enumerate() {
        let word = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little_endian {
            f32::from_le_bytes(word)
        } else {
            f32::from_be_bytes(word)
        };
        if !v.is_finite() {
            return Err(Error::InvalidDepth(format!(
                "{}: non-finite sample at index {i}",
                path.display()
            )));
        }
        let (row, col) = (i / width, i % width);
        values[(height - 1 - row) * width + col] = f64::from(v);
    }
    Ok((width, height, values))
}
