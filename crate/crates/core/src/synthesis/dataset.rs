//! Reproducible benchmark construction from a clear-image + depth corpus.
//!
//! A build draws per-entry parameters from seeds derived from a master seed,
//! renders each entry, and records everything in a JSON manifest. The manifest
//! alone is enough to regenerate byte-identical outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{synthesize, ScatterParams};
use super::params::{entry_seed, sample_params_in, BetaRange, IntensityClass, Palette};
use crate::error::{Error, Result};
use crate::imaging::{load_depth, load_image, save_image, ColorDeviation};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusPair {
    pub clear: PathBuf,
    pub depth: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSpec {
    pub name: String,
    pub class: IntensityClass,
    pub count: usize,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub master_seed: u64,
    #[serde(default = "Palette::standard")]
    pub palette: Palette,
    pub subsets: Vec<SubsetSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub beta_overrides: BTreeMap<IntensityClass, BetaRange>,
    #[serde(default = "default_true")]
    pub normalize_depth: bool,
}

impl DatasetConfig {
    pub fn new(master_seed: u64, subsets: Vec<SubsetSpec>) -> Self {
        Self {
            master_seed,
            palette: Palette::standard(),
            subsets,
            beta_overrides: BTreeMap::new(),
            normalize_depth: true,
        }
    }

    /// One subset per intensity class, each with `count` entries.
    pub fn four_class(master_seed: u64, prefix: &str, count: usize) -> Self {
        let subsets = IntensityClass::ALL
            .iter()
            .map(|&class| SubsetSpec {
                name: format!("{prefix}-{}", class.tag()),
                class,
                count,
            })
            .collect();
        Self::new(master_seed, subsets)
    }

    pub fn beta_range(&self, class: IntensityClass) -> BetaRange {
        self.beta_overrides
            .get(&class)
            .copied()
            .unwrap_or_else(|| class.beta_range())
    }

    pub fn validate(&self) -> Result<()> {
        for range in self.beta_overrides.values() {
            BetaRange::new(range.lo, range.hi)?;
        }
        let mut names: Vec<&str> = self.subsets.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("subset names must be unique".into()));
        }
        if names.iter().any(|n| n.is_empty()) {
            return Err(Error::InvalidParameter("subset names must be non-empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub clear: PathBuf,
    pub depth: PathBuf,
    /// Relative to the directory holding the manifest.
    pub output: PathBuf,
    pub a_s: String,
    pub beta: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl ManifestEntry {
    pub fn params(&self) -> Result<ScatterParams> {
        ScatterParams::new(ColorDeviation::parse_hex(&self.a_s)?, self.beta)
    }

    pub fn is_skipped(&self) -> bool {
        self.skipped.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSubset {
    pub name: String,
    pub class: IntensityClass,
    pub beta_range: BetaRange,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub master_seed: u64,
    pub palette: Vec<String>,
    #[serde(default = "default_true")]
    pub normalize_depth: bool,
    pub subsets: Vec<ManifestSubset>,
}

impl DatasetManifest {
    pub fn entries(&self) -> impl Iterator<Item = (&ManifestSubset, &ManifestEntry)> {
        self.subsets.iter().flat_map(|s| s.entries.iter().map(move |e| (s, e)))
    }

    pub fn entry_count(&self) -> usize {
        self.subsets.iter().map(|s| s.entries.len()).sum()
    }

    pub fn skipped_count(&self) -> usize {
        self.entries().filter(|(_, e)| e.is_skipped()).count()
    }

    /// Checks ranges, palette membership and that every recorded seed
    /// reproduces the recorded parameters.
    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::InvalidManifest(format!("unsupported version {}", self.version)));
        }
        let palette = Palette::from_hex(&self.palette).map_err(|e| Error::InvalidManifest(format!("palette: {e}")))?;
        for subset in &self.subsets {
            BetaRange::new(subset.beta_range.lo, subset.beta_range.hi)
                .map_err(|e| Error::InvalidManifest(format!("{}: {e}", subset.name)))?;
            for (pos, entry) in subset.entries.iter().enumerate() {
                let at = format!("{}[{}]", subset.name, entry.index);
                if entry.index != pos {
                    return Err(Error::InvalidManifest(format!("{at}: out-of-order index")));
                }
                if !subset.beta_range.contains(entry.beta) {
                    return Err(Error::InvalidManifest(format!(
                        "{at}: beta {} outside {}",
                        entry.beta, subset.beta_range
                    )));
                }
                if !palette.contains_hex(&entry.a_s) {
                    return Err(Error::InvalidManifest(format!("{at}: {} not in palette", entry.a_s)));
                }
                if entry.seed != entry_seed(self.master_seed, &subset.name, entry.index) {
                    return Err(Error::InvalidManifest(format!("{at}: seed does not match master seed")));
                }
                let drawn = sample_params_in(entry.seed, subset.beta_range, palette.colors())?;
                if drawn != entry.params()? {
                    return Err(Error::InvalidManifest(format!(
                        "{at}: recorded parameters differ from those drawn by its seed"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

fn subset_dir(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn output_rel(subset: &str, index: usize, clear: &Path) -> PathBuf {
    let stem = clear
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into());
    PathBuf::from(subset_dir(subset)).join(format!("{index:05}_{stem}.png"))
}

/// Loads, validates and renders one entry, writing it under `root`.
fn render_entry(entry: &ManifestEntry, normalize_depth: bool, root: &Path) -> Result<f64> {
    let params = entry.params()?;
    let clear = load_image(&entry.clear)?;
    let depth = load_depth(&entry.depth, normalize_depth)?;
    let result = synthesize(&clear, &depth, &params)?;
    let out = root.join(&entry.output);
    if let Some(parent) = out.parent() {
        fs::create_dir_all(parent)?;
    }
    save_image(&result.image, &out)?;
    Ok(result.clip_fraction)
}

/// Builds a dataset under `out_dir` and writes `out_dir/manifest.json`.
///
/// Entry `i` of a subset uses corpus pair `i mod len`. Entries whose pair
/// cannot be loaded or whose dimensions disagree are recorded as skipped.
pub fn build_dataset(corpus: &[CorpusPair], config: &DatasetConfig, out_dir: &Path) -> Result<DatasetManifest> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;

    let mut subsets: Vec<ManifestSubset> = Vec::with_capacity(config.subsets.len());
    for spec in &config.subsets {
        let range = config.beta_range(spec.class);
        let count = if corpus.is_empty() { 0 } else { spec.count };
        let entries = (0..count)
            .map(|index| {
                let pair = &corpus[index % corpus.len()];
                let seed = entry_seed(config.master_seed, &spec.name, index);
                let params = sample_params_in(seed, range, config.palette.colors())?;
                Ok(ManifestEntry {
                    index,
                    clear: pair.clear.clone(),
                    depth: pair.depth.clone(),
                    output: output_rel(&spec.name, index, &pair.clear),
                    a_s: params.a_s.to_hex(),
                    beta: params.beta,
                    seed,
                    clip_fraction: None,
                    skipped: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        subsets.push(ManifestSubset {
            name: spec.name.clone(),
            class: spec.class,
            beta_range: range,
            entries,
        });
    }

    let normalize = config.normalize_depth;
    subsets.par_iter_mut().for_each(|subset| {
        subset
            .entries
            .par_iter_mut()
            .for_each(|entry| match render_entry(entry, normalize, out_dir) {
                Ok(clip) => entry.clip_fraction = Some(clip),
                Err(e) => entry.skipped = Some(e.to_string()),
            });
    });

    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        master_seed: config.master_seed,
        palette: config.palette.hex_codes(),
        normalize_depth: normalize,
        subsets,
    };
    manifest.validate()?;
    manifest.save(out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RegenerationSummary {
    pub written: usize,
    pub skipped: usize,
    pub failed: Vec<String>,
}

/// Re-renders every non-skipped entry of a validated manifest under `out_dir`.
pub fn regenerate(manifest: &DatasetManifest, out_dir: &Path) -> Result<RegenerationSummary> {
    manifest.validate()?;
    let results: Vec<Option<Result<f64>>> = manifest
        .entries()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(_, entry)| (!entry.is_skipped()).then(|| render_entry(entry, manifest.normalize_depth, out_dir)))
        .collect();
    let mut summary = RegenerationSummary::default();
    for ((subset, entry), res) in manifest.entries().zip(results) {
        match res {
            None => summary.skipped += 1,
            Some(Ok(_)) => summary.written += 1,
            Some(Err(e)) => summary.failed.push(format!("{}[{}]: {e}", subset.name, entry.index)),
        }
    }
    Ok(summary)
}
