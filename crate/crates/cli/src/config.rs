use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use dustsynth::metrics::{FsimConfig, Metric, SsimConfig};
use dustsynth::stats::PriorThresholds;
use dustsynth::synthesis::{BetaRange, CorpusPair, DatasetConfig, IntensityClass, Palette, SubsetSpec};
use serde::{Deserialize, Serialize};

pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.json";

/// Everything a run needs; a run directory archives the resolved copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    /// JSON palette file; the built-in 21-color palette when absent.
    pub palette: Option<PathBuf>,
    pub corpus: Vec<CorpusPair>,
    pub subsets: Vec<SubsetSpec>,
    pub beta_overrides: BTreeMap<IntensityClass, BetaRange>,
    pub normalize_depth: bool,
    pub metrics: Vec<Metric>,
    pub ssim: SsimConfig,
    pub fsim: FsimConfig,
    pub thresholds: PriorThresholds,
    pub clusters: usize,
    pub histogram_bins: usize,
    pub sample_cap: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            palette: None,
            corpus: Vec::new(),
            subsets: Vec::new(),
            beta_overrides: BTreeMap::new(),
            normalize_depth: true,
            metrics: Metric::ALL.to_vec(),
            ssim: SsimConfig::default(),
            fsim: FsimConfig::default(),
            thresholds: PriorThresholds::default(),
            clusters: 15,
            histogram_bins: 256,
            sample_cap: dustsynth::stats::DEFAULT_SAMPLE_CAP,
            output_dir: None,
        }
    }
}

impl RunConfig {
    /// Parses a JSON config; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        cfg.rebase(&base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = &mut self.palette {
            fix(p);
        }
        for pair in &mut self.corpus {
            fix(&mut pair.clear);
            fix(&mut pair.depth);
        }
        if let Some(p) = &mut self.output_dir {
            fix(p);
        }
    }

    pub fn palette(&self) -> anyhow::Result<Palette> {
        match &self.palette {
            Some(p) => Palette::load(p).with_context(|| format!("loading palette {}", p.display())),
            None => Ok(Palette::standard()),
        }
    }

    pub fn dataset_config(&self) -> anyhow::Result<DatasetConfig> {
        let mut cfg = DatasetConfig::new(self.master_seed, self.subsets.clone());
        cfg.palette = self.palette()?;
        cfg.beta_overrides = self.beta_overrides.clone();
        cfg.normalize_depth = self.normalize_depth;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn output_dir(&self) -> anyhow::Result<&Path> {
        match &self.output_dir {
            Some(p) => Ok(p),
            None => bail!("no output directory: pass --out or set output_dir in the config"),
        }
    }

    pub fn save_resolved(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(RESOLVED_CONFIG_FILE);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }
}
