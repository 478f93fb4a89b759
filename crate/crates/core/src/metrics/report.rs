//! Batch evaluation of (test, reference) pairs into CSV/JSON reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use super::delta_e::{color_difference, DeltaEFormula};
use super::fsim::{fsimc, FsimConfig};
use super::no_reference::simple_nr_metrics;
use super::pixel::{mse, psnr_from_mse};
use super::ssim::{ssim, SsimConfig};
use crate::error::{Error, Result};
use crate::imaging::{load_image, ImageRgb};

/// Report columns in their fixed output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "MSE", alias = "mse")]
    Mse,
    #[serde(rename = "PSNR", alias = "psnr")]
    Psnr,
    #[serde(rename = "SSIM", alias = "ssim")]
    Ssim,
    #[serde(rename = "FSIMc", alias = "fsimc", alias = "FSIMC")]
    Fsimc,
    #[serde(rename = "CIE94", alias = "cie94")]
    Cie94,
    #[serde(rename = "CIEDE2000", alias = "ciede2000")]
    Ciede2000,
    #[serde(rename = "AG", alias = "ag")]
    Ag,
    #[serde(rename = "EI", alias = "ei")]
    Ei,
    #[serde(rename = "IE", alias = "ie")]
    Ie,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::Mse,
        Metric::Psnr,
        Metric::Ssim,
        Metric::Fsimc,
        Metric::Cie94,
        Metric::Ciede2000,
        Metric::Ag,
        Metric::Ei,
        Metric::Ie,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mse => "MSE",
            Metric::Psnr => "PSNR",
            Metric::Ssim => "SSIM",
            Metric::Fsimc => "FSIMc",
            Metric::Cie94 => "CIE94",
            Metric::Ciede2000 => "CIEDE2000",
            Metric::Ag => "AG",
            Metric::Ei => "EI",
            Metric::Ie => "IE",
        }
    }

    pub fn needs_reference(self) -> bool {
        !matches!(self, Metric::Ag | Metric::Ei | Metric::Ie)
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown metric {s:?}")))
    }
}

/// Metric values keyed by column; absent metrics are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MetricValues([Option<f64>; 9]);

impl MetricValues {
    pub fn get(&self, m: Metric) -> Option<f64> {
        self.0[m.slot()]
    }

    pub fn set(&mut self, m: Metric, v: f64) {
        self.0[m.slot()] = Some(v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (Metric, f64)> + '_ {
        Metric::ALL.into_iter().filter_map(|m| self.get(m).map(|v| (m, v)))
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(Option::is_none)
    }
}

/// Renders infinities as `"+inf"` / `"-inf"`, finite values as plain numbers.
pub fn format_value(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

impl Serialize for MetricValues {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        for (m, v) in self.iter() {
            if v.is_finite() {
                map.serialize_entry(m.name(), &v)?;
            } else {
                map.serialize_entry(m.name(), &format_value(v))?;
            }
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Metrics to compute; reference-based ones are skipped for pairs without a reference.
    pub metrics: Vec<Metric>,
    pub ssim: SsimConfig,
    pub fsim: FsimConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            metrics: Metric::ALL.to_vec(),
            ssim: SsimConfig::default(),
            fsim: FsimConfig::default(),
        }
    }
}

impl EvalConfig {
    pub fn enabled(&self, m: Metric) -> bool {
        self.metrics.contains(&m)
    }
}

/// Computes every enabled metric for one pair held in memory.
pub fn evaluate_images(test: &ImageRgb, reference: Option<&ImageRgb>, cfg: &EvalConfig) -> Result<MetricValues> {
    let mut out = MetricValues::default();
    if let Some(r) = reference {
        test.ensure_same_dims(r)?;
        if cfg.enabled(Metric::Mse) || cfg.enabled(Metric::Psnr) {
            let m = mse(test, r)?;
            if cfg.enabled(Metric::Mse) {
                out.set(Metric::Mse, m);
            }
            if cfg.enabled(Metric::Psnr) {
                out.set(Metric::Psnr, psnr_from_mse(m));
            }
        }
        if cfg.enabled(Metric::Ssim) {
            out.set(Metric::Ssim, ssim(test, r, &cfg.ssim)?);
        }
        if cfg.enabled(Metric::Fsimc) {
            out.set(Metric::Fsimc, fsimc(test, r, &cfg.fsim)?);
        }
        if cfg.enabled(Metric::Cie94) {
            out.set(Metric::Cie94, color_difference(test, r, DeltaEFormula::Cie94)?);
        }
        if cfg.enabled(Metric::Ciede2000) {
            out.set(Metric::Ciede2000, color_difference(test, r, DeltaEFormula::Ciede2000)?);
        }
    }
    if [Metric::Ag, Metric::Ei, Metric::Ie].iter().any(|m| cfg.enabled(*m)) {
        let nr = simple_nr_metrics(test)?;
        for (m, v) in [(Metric::Ag, nr.ag), (Metric::Ei, nr.ei), (Metric::Ie, nr.ie)] {
            if cfg.enabled(m) {
                out.set(m, v);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub test: PathBuf,
    #[serde(default)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairList {
    pub pairs: Vec<PairSpec>,
}

impl PairList {
    /// Reads `{"pairs": [...]}`; relative paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let mut list: PairList = serde_json::from_slice(&std::fs::read(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in &mut list.pairs {
            p.test = base.join(&p.test);
            if let Some(r) = &mut p.reference {
                *r = base.join(&*r);
            }
        }
        Ok(list)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub test: PathBuf,
    pub reference: Option<PathBuf>,
    pub metrics: Option<MetricValues>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
    /// Arithmetic mean of each metric over the rows that have it.
    pub aggregate: MetricValues,
    pub evaluated: usize,
    pub failed: usize,
}

fn evaluate_pair(pair: &PairSpec, cfg: &EvalConfig) -> Result<MetricValues> {
    let test = load_image(&pair.test)?;
    let reference = pair.reference.as_deref().map(load_image).transpose()?;
    evaluate_images(&test, reference.as_ref(), cfg)
}

/// Evaluates all pairs concurrently; rows keep input order and failures stay per-row.
pub fn evaluate_pairs(pairs: &[PairSpec], cfg: &EvalConfig) -> MetricReport {
    let rows: Vec<MetricRow> = pairs
        .par_iter()
        .map(|p| {
            let (metrics, error) = match evaluate_pair(p, cfg) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            MetricRow {
                test: p.test.clone(),
                reference: p.reference.clone(),
                metrics,
                error,
            }
        })
        .collect();
    MetricReport::from_rows(rows)
}

impl MetricReport {
    pub fn from_rows(rows: Vec<MetricRow>) -> Self {
        let mut aggregate = MetricValues::default();
        for m in Metric::ALL {
            let values: Vec<f64> = rows.iter().filter_map(|r| r.metrics.and_then(|v| v.get(m))).collect();
            if values.is_empty() {
                continue;
            }
            let mean = if values.iter().any(|v| v.is_infinite()) {
                // a perfect pair makes the mean PSNR infinite
                values
                    .iter()
                    .copied()
                    .find(|v| v.is_infinite())
                    .unwrap_or(f64::INFINITY)
            } else {
                values.iter().sum::<f64>() / values.len() as f64
            };
            aggregate.set(m, mean);
        }
        let failed = rows.iter().filter(|r| r.error.is_some()).count();
        Self {
            evaluated: rows.len() - failed,
            failed,
            rows,
            aggregate,
        }
    }

    /// Columns present in at least one row, in fixed order.
    pub fn columns(&self) -> Vec<Metric> {
        Metric::ALL
            .into_iter()
            .filter(|&m| self.aggregate.get(m).is_some())
            .collect()
    }

    /// One line per pair plus a final `mean` row.
    pub fn to_csv(&self) -> String {
        let cols = self.columns();
        let mut out = String::from("test,reference");
        for m in &cols {
            out.push(',');
            out.push_str(m.name());
        }
        out.push_str(",error\n");
        let cell = |v: Option<f64>| v.map(format_value).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&csv_field(&r.test.display().to_string()));
            out.push(',');
            out.push_str(&csv_field(
                &r.reference
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            ));
            for &m in &cols {
                let _ = write!(out, ",{}", cell(r.metrics.and_then(|v| v.get(m))));
            }
            let _ = writeln!(out, ",{}", csv_field(r.error.as_deref().unwrap_or("")));
        }
        out.push_str("mean,");
        for &m in &cols {
            let _ = write!(out, ",{}", cell(self.aggregate.get(m)));
        }
        out.push_str(",\n");
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
