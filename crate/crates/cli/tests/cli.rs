use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dustsynth::imaging::{save_depth_png16, save_image, ImageRgb};
use dustsynth::scenes::balanced_outdoor;
use serde_json::Value;

fn dustsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dustsynth"))
        .args(args)
        .env_remove("DUSTSYNTH_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes scene `seed` as `<name>.png` plus `<name>_depth.png`.
fn scene_files(dir: &Path, name: &str, seed: u64, w: usize, h: usize) -> (PathBuf, PathBuf) {
    let scene = balanced_outdoor(seed, w, h).unwrap();
    let img = dir.join(format!("{name}.png"));
    let depth = dir.join(format!("{name}_depth.png"));
    save_image(&scene.image, &img).unwrap();
    save_depth_png16(&scene.depth, &depth).unwrap();
    (img, depth)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn tree_bytes(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn synthesize_writes_image_and_json_line() {
    let dir = tempfile::tempdir().unwrap();
    let (img, depth) = scene_files(dir.path(), "clear", 1, 40, 30);
    let out = dir.path().join("dusty.png");
    let o = dustsynth(&[
        "synthesize",
        "--clear",
        s(&img),
        "--depth",
        s(&depth),
        "--a-s",
        "#C89463",
        "--beta",
        "0.4",
        "-o",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.exists());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    let v: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(v["beta"], 0.4);
    assert_eq!(v["a_s"], "#C89463");
    assert!(v["clip_fraction"].as_f64().unwrap() >= 0.0);
}

#[test]
fn synthesize_defaults_to_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let (img, depth) = scene_files(dir.path(), "clear", 1, 20, 20);
    let run = dir.path().join("run");
    let o = dustsynth(&[
        "synthesize",
        "--clear",
        s(&img),
        "--depth",
        s(&depth),
        "--a-s",
        "#a14a10",
        "--beta",
        "0.55",
        "--out",
        s(&run),
        "--quiet",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(run.join("clear_dust.png").exists());
    assert!(stderr(&o).is_empty());
}

#[test]
fn synthesize_rejects_zero_beta() {
    let dir = tempfile::tempdir().unwrap();
    let (img, depth) = scene_files(dir.path(), "clear", 1, 20, 20);
    let o = dustsynth(&[
        "synthesize",
        "--clear",
        s(&img),
        "--depth",
        s(&depth),
        "--a-s",
        "#C89463",
        "--beta",
        "0",
        "-o",
        s(&dir.path().join("x.png")),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("0 < beta"), "{}", stderr(&o));
    assert!(!dir.path().join("x.png").exists());
}

#[test]
fn synthesize_names_both_shapes_on_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let (img, _) = scene_files(dir.path(), "a", 1, 24, 16);
    let (_, depth) = scene_files(dir.path(), "b", 1, 16, 24);
    let o = dustsynth(&[
        "synthesize",
        "--clear",
        s(&img),
        "--depth",
        s(&depth),
        "--a-s",
        "#C89463",
        "--beta",
        "0.4",
        "-o",
        s(&dir.path().join("x.png")),
    ]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("24x16") && err.contains("16x24"), "{err}");
}

#[test]
fn synthesize_rejects_unordered_tint() {
    let dir = tempfile::tempdir().unwrap();
    let (img, depth) = scene_files(dir.path(), "a", 1, 16, 16);
    let o = dustsynth(&[
        "synthesize",
        "--clear",
        s(&img),
        "--depth",
        s(&depth),
        "--a-s",
        "#3366CC",
        "--beta",
        "0.4",
        "-o",
        s(&dir.path().join("x.png")),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("#3366CC"), "{}", stderr(&o));
}

fn write_build_config(dir: &Path, corpus: &[(PathBuf, PathBuf)], count: usize, out: &str) -> PathBuf {
    let cfg = serde_json::json!({
        "master_seed": 42,
        "corpus": corpus.iter().map(|(c, d)| serde_json::json!({"clear": c, "depth": d})).collect::<Vec<_>>(),
        "subsets": [
            {"name": "T-L", "class": "light", "count": count},
            {"name": "T-M", "class": "medium", "count": count},
            {"name": "T-D", "class": "dense", "count": count},
            {"name": "T-H", "class": "hybrid", "count": count},
        ],
        "output_dir": out,
    });
    let path = dir.join("run.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn build_is_complete_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus: Vec<_> = (0..4)
        .map(|i| scene_files(dir.path(), &format!("c{i}"), i, 32, 24))
        .collect();
    let cfg = write_build_config(dir.path(), &corpus, 4, "out1");
    let o = dustsynth(&["build", "--config", s(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out1 = dir.path().join("out1");
    for f in ["config.resolved.json", "manifest.json", "entries.jsonl", "summary.json"] {
        assert!(out1.join(f).exists(), "missing {f}");
    }
    let manifest = read_json(&out1.join("manifest.json"));
    let ranges = [(0.3, 0.4), (0.4, 0.5), (0.5, 0.6), (0.3, 0.6)];
    let mut n = 0;
    for (subset, (lo, hi)) in manifest["subsets"].as_array().unwrap().iter().zip(ranges) {
        for e in subset["entries"].as_array().unwrap() {
            let b = e["beta"].as_f64().unwrap();
            assert!(b >= lo && b <= hi, "{b} outside [{lo}, {hi}]");
            n += 1;
        }
    }
    assert_eq!(n, 16);
    assert_eq!(
        fs::read_to_string(out1.join("entries.jsonl")).unwrap().lines().count(),
        16
    );
    let summary = read_json(&out1.join("summary.json"));
    assert_eq!(summary["total"], 16);
    assert_eq!(summary["skipped"], 0);
    assert!(stdout(&o).contains("T-D"));

    // same config into a second directory, then again into the first
    let o = dustsynth(&["build", "--config", s(&cfg), "--out", s(&dir.path().join("out2"))]);
    assert!(o.status.success());
    let first = tree_bytes(&out1);
    let mut second = tree_bytes(&dir.path().join("out2"));
    // the resolved config records its own output directory
    second.remove(Path::new("config.resolved.json"));
    let mut first_wo = first.clone();
    first_wo.remove(Path::new("config.resolved.json"));
    assert_eq!(first_wo, second);
    let o = dustsynth(&["build", "--config", s(&cfg)]);
    assert!(o.status.success());
    assert_eq!(tree_bytes(&out1), first);

    // regeneration from the manifest reproduces every image
    let regen = dir.path().join("regen");
    let o = dustsynth(&[
        "build",
        "--from-manifest",
        s(&out1.join("manifest.json")),
        "--out",
        s(&regen),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for (rel, bytes) in &first {
        if rel.extension().is_some_and(|e| e == "png") {
            assert_eq!(&fs::read(regen.join(rel)).unwrap(), bytes, "{}", rel.display());
        }
    }
}

#[test]
fn build_skips_missing_images() {
    let dir = tempfile::tempdir().unwrap();
    let mut corpus: Vec<_> = (0..2)
        .map(|i| scene_files(dir.path(), &format!("c{i}"), i, 20, 20))
        .collect();
    corpus.push((dir.path().join("gone.png"), corpus[0].1.clone()));
    let cfg = serde_json::json!({
        "corpus": corpus.iter().map(|(c, d)| serde_json::json!({"clear": c, "depth": d})).collect::<Vec<_>>(),
        "subsets": [{"name": "only", "class": "medium", "count": 3}],
    });
    let path = dir.path().join("cfg.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = dir.path().join("out");
    let o = dustsynth(&["build", "--config", s(&path), "--out", s(&out), "--seed", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["skipped"], 1);
    assert_eq!(summary["rendered"], 2);
    assert_eq!(read_json(&out.join("manifest.json"))["master_seed"], 5);
    assert!(stdout(&o).contains("1 skipped"));
}

#[test]
fn build_rejects_broken_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, "{ not json").unwrap();
    let o = dustsynth(&["build", "--config", s(&path), "--out", s(dir.path())]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("parsing config"));
}

#[test]
fn config_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = vec![scene_files(dir.path(), "c0", 0, 16, 16)];
    let cfg = write_build_config(dir.path(), &corpus, 1, "envout");
    let o = Command::new(env!("CARGO_BIN_EXE_dustsynth"))
        .args(["build"])
        .env("DUSTSYNTH_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("envout/manifest.json").exists());
}

#[test]
fn analyze_separates_dusty_from_gray() {
    let dir = tempfile::tempdir().unwrap();
    let (img, depth) = scene_files(dir.path(), "clear", 3, 64, 48);
    let dusty = dir.path().join("dusty.png");
    let o = dustsynth(&[
        "synthesize",
        "--clear",
        s(&img),
        "--depth",
        s(&depth),
        "--a-s",
        "#C89463",
        "--beta",
        "0.55",
        "-o",
        s(&dusty),
    ]);
    assert!(o.status.success());
    let out = dir.path().join("an");
    let o = dustsynth(&["analyze", s(&dusty), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let prior = read_json(&out.join("dusty/prior.json"));
    assert_eq!(prior["verdict"], true);
    let clusters = fs::read_to_string(out.join("dusty/clusters.csv")).unwrap();
    assert_eq!(clusters.lines().next().unwrap(), "cluster_id,L,a,b,count");
    assert_eq!(clusters.lines().count(), 16);
    assert_eq!(
        fs::read_to_string(out.join("dusty/histogram.csv"))
            .unwrap()
            .lines()
            .count(),
        257
    );
    let line: Value = serde_json::from_str(
        fs::read_to_string(out.join("analysis.jsonl"))
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    assert!(line["collinearity_residual"].as_f64().is_some());
    assert!(out.join("config.resolved.json").exists() && out.join("summary.json").exists());

    let gray = dir.path().join("gray.png");
    let noise = ImageRgb::from_fn(32, 32, |x, y| [((x * 7 + y * 13) % 32) as f64 / 31.0; 3]);
    save_image(&noise, &gray).unwrap();
    let o = dustsynth(&["analyze", s(&gray), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let prior = read_json(&out.join("gray/prior.json"));
    assert_eq!(prior["verdict"], false);
    assert_eq!(prior["shifting_score"], 0.0);
}

#[test]
fn analyze_fails_when_k_exceeds_distinct_colors() {
    let dir = tempfile::tempdir().unwrap();
    let two = dir.path().join("two.png");
    save_image(
        &ImageRgb::from_fn(8, 8, |x, _| if x < 4 { [0.9, 0.2, 0.1] } else { [0.1, 0.3, 0.8] }),
        &two,
    )
    .unwrap();
    let o = dustsynth(&["analyze", s(&two), "--out", s(&dir.path().join("an"))]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("distinct"), "{}", stderr(&o));
    let o = dustsynth(&["analyze", s(&two), "-k", "2", "--out", s(&dir.path().join("an2"))]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn analyze_reads_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = vec![scene_files(dir.path(), "c0", 0, 32, 32)];
    let cfg = write_build_config(dir.path(), &corpus, 1, "ds");
    assert!(dustsynth(&["build", "--config", s(&cfg)]).status.success());
    let out = dir.path().join("an");
    let o = dustsynth(&["analyze", s(&dir.path().join("ds/manifest.json")), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(out.join("analysis.jsonl")).unwrap().lines().count(),
        4
    );
    assert!(out.join("T-D").is_dir());
}

#[test]
fn evaluate_identical_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, _) = scene_files(dir.path(), "a", 1, 40, 36);
    let (b, _) = scene_files(dir.path(), "b", 2, 40, 36);
    let pairs = serde_json::json!({"pairs": [
        {"test": "a.png", "reference": "a.png"},
        {"test": "b.png", "reference": b},
    ]});
    let list = dir.path().join("pairs.json");
    fs::write(&list, pairs.to_string()).unwrap();
    let out = dir.path().join("ev");
    let o = dustsynth(&["evaluate", s(&list), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "test,reference,MSE,PSNR,SSIM,FSIMc,CIE94,CIEDE2000,AG,EI,IE,error"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("mean,,0,+inf,1,1,0,0,"), "{}", lines[3]);
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["aggregate"]["PSNR"], "+inf");
    assert_eq!(report["aggregate"]["SSIM"], 1.0);
    assert_eq!(report["aggregate"]["MSE"], 0.0);
    assert_eq!(report["aggregate"]["CIEDE2000"], 0.0);
    assert_eq!(report["rows"][0]["test"], s(&a));
    assert!(out.join("summary.json").exists() && out.join("config.resolved.json").exists());
}

#[test]
fn evaluate_without_references_and_with_failures() {
    let dir = tempfile::tempdir().unwrap();
    scene_files(dir.path(), "a", 1, 20, 20);
    scene_files(dir.path(), "b", 2, 20, 20);
    let list = dir.path().join("pairs.json");
    fs::write(
        &list,
        r#"{"pairs": [{"test": "a.png"}, {"test": "missing.png"}, {"test": "b.png", "reference": null}]}"#,
    )
    .unwrap();
    let out = dir.path().join("ev");
    let o = dustsynth(&["evaluate", s(&list), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "test,reference,AG,EI,IE,error");
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["failed"], 1);
    assert_eq!(report["evaluated"], 2);
    assert!(report["rows"][1]["error"].as_str().unwrap().contains("missing.png"));

    let o = dustsynth(&["evaluate", s(&list), "--metrics", "ie", "--out", s(&out)]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "test,reference,IE,error");
}

#[test]
fn evaluate_a_dataset_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let corpus: Vec<_> = (0..2)
        .map(|i| scene_files(dir.path(), &format!("c{i}"), i, 40, 40))
        .collect();
    let cfg = write_build_config(dir.path(), &corpus, 2, "ds");
    assert!(dustsynth(&["build", "--config", s(&cfg)]).status.success());
    let out = dir.path().join("ev");
    let o = dustsynth(&["evaluate", s(&dir.path().join("ds/manifest.json")), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["rows"].as_array().unwrap().len(), 8);
    assert_eq!(report["failed"], 0);
    let ssim = report["aggregate"]["SSIM"].as_f64().unwrap();
    assert!(ssim > -1.0 && ssim < 1.0);
}

#[test]
fn evaluate_rejects_unparseable_input() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("pairs.json");
    fs::write(&list, r#"{"items": []}"#).unwrap();
    let o = dustsynth(&["evaluate", s(&list), "--out", s(dir.path())]);
    assert!(!o.status.success());
}

#[test]
fn time_reports_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let o = dustsynth(&[
        "time",
        "--sizes",
        "32,48,64",
        "--repetitions",
        "5",
        "--warmup",
        "1",
        "--out",
        s(&out),
        "--seed",
        "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&out.join("timing.json"));
    assert_eq!(report["repetitions"], 5);
    assert_eq!(report["warmup"], 1);
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let samples: Vec<f64> = row["samples"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert_eq!(samples.len(), 5);
        assert!(samples.iter().all(|&x| x > 0.0));
        let mean = samples.iter().sum::<f64>() / 5.0;
        assert!((mean - row["mean_seconds"].as_f64().unwrap()).abs() <= 1e-12);
    }
    let csv = fs::read_to_string(out.join("timing.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(out.join("summary.json").exists() && out.join("config.resolved.json").exists());
    assert!(!dustsynth(&["time", "--repetitions", "2", "--out", s(&out)])
        .status
        .success());
}

#[test]
fn missing_output_directory_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("a.png");
    save_image(&ImageRgb::filled(8, 8, [0.5; 3]).unwrap(), &img).unwrap();
    let o = dustsynth(&["analyze", s(&img), "-k", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--out"));
}
