//! sRGB to CIELAB conversion and sandstorm color deviations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::buffer::{ImageLab, ImageRgb};
use crate::error::{Error, Result};

// sRGB primaries to XYZ, D65.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

// Reference white is the image of RGB (1, 1, 1) under the matrix above, so the
// gray axis lands on a = b = 0 up to rounding.
const WHITE: [f64; 3] = [
    RGB_TO_XYZ[0][0] + RGB_TO_XYZ[0][1] + RGB_TO_XYZ[0][2],
    RGB_TO_XYZ[1][0] + RGB_TO_XYZ[1][1] + RGB_TO_XYZ[1][2],
    RGB_TO_XYZ[2][0] + RGB_TO_XYZ[2][1] + RGB_TO_XYZ[2][2],
];

const DELTA: f64 = 6.0 / 29.0;

/// IEC 61966-2-1 inverse transfer function.
pub fn srgb_to_linear(v: f64) -> f64 {
    if v <= 0.040_45 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Converts one sRGB pixel (channels in `[0, 1]`) to `[L, a, b]`.
pub fn srgb_to_lab(px: [f64; 3]) -> [f64; 3] {
    let lin = px.map(srgb_to_linear);
    let xyz: [f64; 3] =
        std::array::from_fn(|r| RGB_TO_XYZ[r][0] * lin[0] + RGB_TO_XYZ[r][1] * lin[1] + RGB_TO_XYZ[r][2] * lin[2]);
    let fx = lab_f(xyz[0] / WHITE[0]);
    let fy = lab_f(xyz[1] / WHITE[1]);
    let fz = lab_f(xyz[2] / WHITE[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub fn rgb_to_lab(image: &ImageRgb) -> ImageLab {
    ImageLab::from_parts(
        image.width(),
        image.height(),
        image.pixels().iter().map(|&px| srgb_to_lab(px)).collect(),
    )
}

/// Global color deviation of a sandstorm scene.
///
/// Channels are normalized intensities with the strict ordering `r > g > b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorDeviation {
    r: f64,
    g: f64,
    b: f64,
}

impl ColorDeviation {
    pub fn new(r: f64, g: f64, b: f64) -> Result<Self> {
        if [r, g, b].iter().any(|v| !v.is_finite() || !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter(format!(
                "color deviation ({r}, {g}, {b}) outside [0, 1]"
            )));
        }
        if !(r > g && g > b) {
            return Err(Error::OrderingViolation { hex: hex_of([r, g, b]) });
        }
        Ok(Self { r, g, b })
    }

    /// Parses `#RRGGBB` (case-insensitive); each byte maps to `v / 255`.
    pub fn parse_hex(code: &str) -> Result<Self> {
        let bytes = parse_hex_bytes(code)?;
        let [r, g, b] = bytes.map(|v| f64::from(v) / 255.0);
        if !(r > g && g > b) {
            return Err(Error::OrderingViolation { hex: code.to_string() });
        }
        Ok(Self { r, g, b })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn channels(&self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    /// Per-channel complement `1 - a`.
    pub fn complement(&self) -> [f64; 3] {
        self.channels().map(|v| 1.0 - v)
    }

    /// Uppercase `#RRGGBB`, channels rounded to the nearest byte.
    pub fn to_hex(&self) -> String {
        hex_of(self.channels())
    }
}

fn parse_hex_bytes(code: &str) -> Result<[u8; 3]> {
    let digits = code
        .strip_prefix('#')
        .filter(|d| d.len() == 6 && d.bytes().all(|c| c.is_ascii_hexdigit()))
        .ok_or_else(|| Error::MalformedHex(code.to_string()))?;
    let byte = |i: usize| u8::from_str_radix(&digits[i..i + 2], 16).map_err(|_| Error::MalformedHex(code.to_string()));
    Ok([byte(0)?, byte(2)?, byte(4)?])
}

fn hex_of(px: [f64; 3]) -> String {
    let [r, g, b] = px.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8);
    format!("#{r:02X}{g:02X}{b:02X}")
}

impl fmt::Display for ColorDeviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for ColorDeviation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_hex(s)
    }
}

impl Serialize for ColorDeviation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for ColorDeviation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Self::parse_hex(&s).map_err(serde::de::Error::custom)
    }
}
