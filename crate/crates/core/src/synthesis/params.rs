//! Dust intensity classes, the tint palette and seeded parameter sampling.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::model::ScatterParams;
use crate::error::{Error, Result};
use crate::imaging::ColorDeviation;

const DEFAULT_PALETTE: &str = include_str!("../../data/palette.json");

/// Closed interval of attenuation coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaRange {
    pub lo: f64,
    pub hi: f64,
}

impl BetaRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta range [{lo}, {hi}] must satisfy 0 < lo <= hi <= 1"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, beta: f64) -> bool {
        (self.lo..=self.hi).contains(&beta)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

impl fmt::Display for BetaRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntensityClass {
    #[serde(alias = "L", alias = "Light")]
    Light,
    #[serde(alias = "M", alias = "Medium")]
    Medium,
    #[serde(alias = "D", alias = "Dense")]
    Dense,
    #[serde(alias = "H", alias = "Hybrid")]
    Hybrid,
}

impl IntensityClass {
    pub const ALL: [IntensityClass; 4] = [Self::Light, Self::Medium, Self::Dense, Self::Hybrid];

    pub fn beta_range(self) -> BetaRange {
        let (lo, hi) = match self {
            Self::Light => (0.3, 0.4),
            Self::Medium => (0.4, 0.5),
            Self::Dense => (0.5, 0.6),
            Self::Hybrid => (0.3, 0.6),
        };
        BetaRange { lo, hi }
    }

    pub fn tag(self) -> char {
        match self {
            Self::Light => 'L',
            Self::Medium => 'M',
            Self::Dense => 'D',
            Self::Hybrid => 'H',
        }
    }
}

impl fmt::Display for IntensityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Light => "light",
            Self::Medium => "medium",
            Self::Dense => "dense",
            Self::Hybrid => "hybrid",
        };
        f.write_str(name)
    }
}

/// The set of admissible dust tints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Palette(Vec<ColorDeviation>);

#[derive(Deserialize)]
#[serde(untagged)]
enum PaletteFile {
    List(Vec<String>),
    Wrapped { palette: Vec<String> },
}

impl Palette {
    /// The 21 tints measured from the deepest-field regions of real sandstorm photographs.
    pub fn standard() -> Self {
        Self::from_json(DEFAULT_PALETTE).expect("bundled palette is valid")
    }

    pub fn new(colors: Vec<ColorDeviation>) -> Result<Self> {
        if colors.is_empty() {
            return Err(Error::EmptyPalette);
        }
        Ok(Self(colors))
    }

    pub fn from_hex<S: AsRef<str>>(codes: &[S]) -> Result<Self> {
        let colors = codes
            .iter()
            .map(|c| ColorDeviation::parse_hex(c.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(colors)
    }

    /// Accepts either a bare JSON array of hex codes or `{"palette": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let codes = match serde_json::from_str::<PaletteFile>(text)? {
            PaletteFile::List(v) | PaletteFile::Wrapped { palette: v } => v,
        };
        Self::from_hex(&codes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_json(&text)
    }

    pub fn colors(&self) -> &[ColorDeviation] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn hex_codes(&self) -> Vec<String> {
        self.0.iter().map(ColorDeviation::to_hex).collect()
    }

    pub fn contains_hex(&self, hex: &str) -> bool {
        self.0.iter().any(|c| c.to_hex().eq_ignore_ascii_case(hex))
    }
}

/// Draws `beta` uniformly from the class interval and a tint uniformly from
/// the palette. Identical seeds give identical parameters.
pub fn sample_params(seed: u64, class: IntensityClass, palette: &[ColorDeviation]) -> Result<ScatterParams> {
    sample_params_in(seed, class.beta_range(), palette)
}

pub fn sample_params_in(seed: u64, range: BetaRange, palette: &[ColorDeviation]) -> Result<ScatterParams> {
    if palette.is_empty() {
        return Err(Error::EmptyPalette);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = rng.random_range(range.lo..=range.hi);
    let a_s = palette[rng.random_range(0..palette.len())];
    ScatterParams::new(a_s, beta)
}

/// Per-entry seed derived from the master seed, subset name and entry index.
pub fn entry_seed(master_seed: u64, subset: &str, index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update((subset.len() as u64).to_le_bytes());
    h.update(subset.as_bytes());
    h.update((index as u64).to_le_bytes());
    let digest = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}
