use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use dustsynth::imaging::{load_depth, load_image, save_image, ColorDeviation};
use dustsynth::metrics::{evaluate_pairs, format_value, EvalConfig, Metric, PairList, PairSpec};
use dustsynth::stats::{channel_histograms, image_clusters, prior_characteristics, KmeansConfig};
use dustsynth::synthesis::{build_dataset, regenerate, synthesize as render, DatasetManifest, ScatterParams};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::timing::run_timing;
use crate::{AnalyzeArgs, BuildArgs, EvaluateArgs, SynthesizeArgs, TimeArgs};

pub const SUMMARY_FILE: &str = "summary.json";

pub struct Log {
    pub quiet: bool,
}

impl Log {
    pub fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> anyhow::Result<()> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, &item)?;
        out.push(b'\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

fn run_dir(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    let dir = cfg.output_dir()?.to_path_buf();
    cfg.save_resolved(&dir)?;
    Ok(dir)
}

pub fn synthesize(cfg: &RunConfig, args: &SynthesizeArgs, log: &Log) -> anyhow::Result<()> {
    let a_s = ColorDeviation::parse_hex(&args.a_s)?;
    let params = ScatterParams::new(a_s, args.beta)?;
    let output = match (&args.output, &cfg.output_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => {
            let stem = args.clear.file_stem().unwrap_or_default().to_string_lossy();
            dir.join(format!("{stem}_dust.png"))
        }
        (None, None) => bail!("no output path: pass --output or --out"),
    };
    let clear = load_image(&args.clear)?;
    let depth = load_depth(&args.depth, !args.raw_depth && cfg.normalize_depth)?;
    let result = render(&clear, &depth, &params)?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    save_image(&result.image, &output)?;
    log.info(format!("wrote {}", output.display()));
    let line = json!({
        "output": output,
        "width": clear.width(),
        "height": clear.height(),
        "a_s": a_s.to_hex(),
        "beta": params.beta,
        "clip_fraction": result.clip_fraction,
        "pre_clamp_min": result.pre_clamp_min,
        "pre_clamp_max": result.pre_clamp_max,
    });
    println!("{line}");
    Ok(())
}

#[derive(Serialize)]
struct SubsetSummary<'a> {
    name: &'a str,
    class: String,
    beta_range: [f64; 2],
    entries: usize,
    skipped: usize,
}

fn dataset_summary(manifest: &DatasetManifest) -> (serde_json::Value, Vec<String>) {
    let subsets: Vec<SubsetSummary> = manifest
        .subsets
        .iter()
        .map(|s| SubsetSummary {
            name: &s.name,
            class: s.class.to_string(),
            beta_range: [s.beta_range.lo, s.beta_range.hi],
            entries: s.entries.len(),
            skipped: s.entries.iter().filter(|e| e.is_skipped()).count(),
        })
        .collect();
    let mut lines: Vec<String> = subsets
        .iter()
        .map(|s| {
            format!(
                "{:<16} {:<7} beta [{:.2}, {:.2}]  {:>5} entries  {} skipped",
                s.name, s.class, s.beta_range[0], s.beta_range[1], s.entries, s.skipped
            )
        })
        .collect();
    let total = manifest.entry_count();
    let skipped = manifest.skipped_count();
    lines.push(format!(
        "total {total} entries, {} rendered, {skipped} skipped",
        total - skipped
    ));
    let value = json!({
        "total": total,
        "rendered": total - skipped,
        "skipped": skipped,
        "subsets": subsets,
    });
    (value, lines)
}

pub fn build(cfg: &RunConfig, args: &BuildArgs, log: &Log) -> anyhow::Result<()> {
    let dir = run_dir(cfg)?;
    let manifest = match &args.from_manifest {
        Some(path) => {
            let manifest = DatasetManifest::load(path)?;
            let summary = regenerate(&manifest, &dir)?;
            if !summary.failed.is_empty() {
                bail!(
                    "{} entries failed to re-render: {}",
                    summary.failed.len(),
                    summary.failed.join("; ")
                );
            }
            manifest.save(dir.join(dustsynth::synthesis::MANIFEST_FILE))?;
            manifest
        }
        None => {
            if cfg.corpus.is_empty() {
                bail!("config lists no corpus images");
            }
            if cfg.subsets.is_empty() {
                bail!("config lists no subsets");
            }
            build_dataset(&cfg.corpus, &cfg.dataset_config()?, &dir)?
        }
    };
    for (subset, entry) in manifest.entries() {
        if let Some(reason) = &entry.skipped {
            log.info(format!("skipped {}[{}]: {reason}", subset.name, entry.index));
        }
    }
    write_jsonl(
        &dir.join("entries.jsonl"),
        manifest.entries().map(|(s, e)| {
            let mut v = serde_json::to_value(e).expect("entries serialize");
            v["subset"] = json!(s.name);
            v["class"] = json!(s.class);
            v
        }),
    )?;
    let (summary, lines) = dataset_summary(&manifest);
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    for line in lines {
        println!("{line}");
    }
    Ok(())
}

#[derive(Serialize)]
struct AnalysisLine {
    image: PathBuf,
    label: String,
    verdict: bool,
    sequential_ok: bool,
    shifting_score: f64,
    concentration_scores: [f64; 3],
    means: [f64; 3],
    k: usize,
    loss: f64,
    iterations: usize,
    collinearity_residual: Option<f64>,
}

fn analysis_inputs(input: &Path) -> anyhow::Result<Vec<(PathBuf, String)>> {
    let is_json = input.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if !is_json {
        let stem = input.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        return Ok(vec![(input.to_path_buf(), stem)]);
    }
    let manifest = DatasetManifest::load(input)?;
    let base = input.parent().unwrap_or(Path::new(""));
    Ok(manifest
        .entries()
        .filter(|(_, e)| !e.is_skipped())
        .map(|(_, e)| {
            let label = e.output.with_extension("").to_string_lossy().into_owned();
            (base.join(&e.output), label)
        })
        .collect())
}

pub fn analyze(cfg: &RunConfig, args: &AnalyzeArgs, log: &Log) -> anyhow::Result<()> {
    let inputs = analysis_inputs(&args.input)?;
    let dir = run_dir(cfg)?;
    let kcfg = KmeansConfig {
        k: args.k.unwrap_or(cfg.clusters),
        seed: cfg.master_seed,
        ..Default::default()
    };
    let mut lines = Vec::with_capacity(inputs.len());
    for (path, label) in inputs {
        log.info(format!("analyzing {}", path.display()));
        let image = load_image(&path)?;
        let hist = channel_histograms(&image, cfg.histogram_bins)?;
        let prior = prior_characteristics(&image, cfg.thresholds);
        let clusters = image_clusters(&image, args.levels, cfg.sample_cap, &kcfg)
            .with_context(|| format!("clustering {}", path.display()))?;
        let sub = dir.join(&label);
        fs::create_dir_all(&sub)?;
        fs::write(sub.join("histogram.csv"), hist.to_csv())?;
        write_json(&sub.join("prior.json"), &prior)?;
        fs::write(sub.join("clusters.csv"), clusters.to_csv())?;
        println!(
            "{label}: verdict={} shifting={:.4} residual={}",
            prior.verdict,
            prior.shifting_score,
            clusters
                .collinearity_residual
                .map_or("n/a".into(), |r| format!("{r:.4}"))
        );
        lines.push(AnalysisLine {
            image: path,
            label,
            verdict: prior.verdict,
            sequential_ok: prior.sequential_ok,
            shifting_score: prior.shifting_score,
            concentration_scores: prior.concentration_scores,
            means: prior.means,
            k: clusters.k,
            loss: clusters.loss,
            iterations: clusters.iterations,
            collinearity_residual: clusters.collinearity_residual,
        });
    }
    write_jsonl(&dir.join("analysis.jsonl"), &lines)?;
    write_json(
        &dir.join(SUMMARY_FILE),
        &json!({
            "images": lines.len(),
            "verdict_true": lines.iter().filter(|l| l.verdict).count(),
            "k": kcfg.k,
        }),
    )?;
    Ok(())
}

fn evaluation_pairs(input: &Path) -> anyhow::Result<Vec<PairSpec>> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", input.display()))?;
    if value.get("pairs").is_some() {
        return Ok(PairList::load(input)?.pairs);
    }
    if value.get("subsets").is_some() {
        let manifest = DatasetManifest::load(input)?;
        let base = input.parent().unwrap_or(Path::new(""));
        return Ok(manifest
            .entries()
            .filter(|(_, e)| !e.is_skipped())
            .map(|(_, e)| PairSpec {
                test: base.join(&e.output),
                reference: Some(e.clear.clone()),
            })
            .collect());
    }
    bail!("{} is neither a pair list nor a dataset manifest", input.display())
}

pub fn evaluate(cfg: &RunConfig, args: &EvaluateArgs, log: &Log) -> anyhow::Result<()> {
    let pairs = evaluation_pairs(&args.input)?;
    let metrics = match &args.metrics {
        Some(names) => names
            .iter()
            .map(|n| n.parse::<Metric>())
            .collect::<Result<Vec<_>, _>>()?,
        None => cfg.metrics.clone(),
    };
    let resolved = RunConfig {
        metrics: metrics.clone(),
        ..cfg.clone()
    };
    let dir = run_dir(&resolved)?;
    let eval = EvalConfig {
        metrics,
        ssim: cfg.ssim,
        fsim: cfg.fsim,
    };
    log.info(format!("evaluating {} pairs", pairs.len()));
    let report = evaluate_pairs(&pairs, &eval);
    for row in &report.rows {
        if let Some(e) = &row.error {
            log.info(format!("failed {}: {e}", row.test.display()));
        }
    }
    fs::write(dir.join("report.csv"), report.to_csv())?;
    fs::write(dir.join("report.json"), report.to_json()? + "\n")?;
    write_json(
        &dir.join(SUMMARY_FILE),
        &json!({
            "pairs": report.rows.len(),
            "evaluated": report.evaluated,
            "failed": report.failed,
            "aggregate": report.aggregate,
        }),
    )?;
    let agg: Vec<String> = report
        .aggregate
        .iter()
        .map(|(m, v)| format!("{m}={}", format_value(v)))
        .collect();
    println!(
        "{} pairs, {} evaluated, {} failed; mean {}",
        report.rows.len(),
        report.evaluated,
        report.failed,
        agg.join(" ")
    );
    Ok(())
}

pub fn time(cfg: &RunConfig, args: &TimeArgs, log: &Log) -> anyhow::Result<()> {
    let dir = run_dir(cfg)?;
    let eval = EvalConfig {
        metrics: cfg.metrics.clone(),
        ssim: cfg.ssim,
        fsim: cfg.fsim,
    };
    log.info(format!("timing sizes {:?}", args.sizes));
    let report = run_timing(
        &args.sizes,
        args.repetitions,
        args.warmup,
        cfg.master_seed,
        &cfg.palette()?,
        &eval,
    )?;
    write_json(&dir.join("timing.json"), &report)?;
    let csv = report.to_csv();
    fs::write(dir.join("timing.csv"), &csv)?;
    write_json(
        &dir.join(SUMMARY_FILE),
        &json!({
            "rows": report.rows.len(),
            "sizes": report.sizes(),
            "repetitions": report.repetitions,
            "warmup": report.warmup,
        }),
    )?;
    std::io::stdout().write_all(csv.as_bytes())?;
    Ok(())
}
