//! Wall-clock benchmarks of synthesis and evaluation on generated images.
//!
//! Each (operation, size) cell runs `warmup` untimed calls, then
//! `repetitions` timed ones on a monotonic clock. The kernels run on the
//! calling thread.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use anyhow::{bail, Context};
use dustsynth::metrics::{evaluate_images, EvalConfig};
use dustsynth::scenes::noise_gradient;
use dustsynth::synthesis::{synthesize, Palette, ScatterParams};
use serde::{Deserialize, Serialize};

pub const MIN_REPETITIONS: usize = 3;
pub const MIN_SIZE: usize = 32;
pub const OPERATIONS: [&str; 2] = ["synthesize", "evaluate"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub operation: String,
    /// Side length of the square test image.
    pub size: usize,
    /// Timed samples in seconds, warmup excluded.
    pub samples: Vec<f64>,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub repetitions: usize,
    pub warmup: usize,
    pub seed: u64,
    pub clock: String,
    pub rows: Vec<TimingRow>,
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Runs `f` `warmup` times untimed, then returns `repetitions` timings in seconds.
pub fn time_samples(
    warmup: usize,
    repetitions: usize,
    mut f: impl FnMut() -> anyhow::Result<()>,
) -> anyhow::Result<Vec<f64>> {
    for _ in 0..warmup {
        f()?;
    }
    let mut out = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        f()?;
        out.push(start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE));
    }
    Ok(out)
}

pub fn run_timing(
    sizes: &[usize],
    repetitions: usize,
    warmup: usize,
    seed: u64,
    palette: &Palette,
    eval: &EvalConfig,
) -> anyhow::Result<TimingReport> {
    if repetitions < MIN_REPETITIONS {
        bail!("repetitions must be at least {MIN_REPETITIONS}, got {repetitions}");
    }
    if sizes.is_empty() {
        bail!("no image sizes given");
    }
    if let Some(s) = sizes.iter().find(|&&s| s < MIN_SIZE) {
        bail!("image size {s} is below the minimum of {MIN_SIZE}");
    }
    let params = ScatterParams::new(palette.colors()[0], 0.45)?;
    let mut rows = Vec::new();
    for &size in sizes {
        let scene = noise_gradient(seed ^ size as u64, size, size).context("generating test image")?;
        let dusty = synthesize(&scene.image, &scene.depth, &params)?.image;
        let samples = time_samples(warmup, repetitions, || {
            black_box(synthesize(black_box(&scene.image), black_box(&scene.depth), &params)?);
            Ok(())
        })?;
        rows.push(row(OPERATIONS[0], size, samples));
        let samples = time_samples(warmup, repetitions, || {
            black_box(evaluate_images(black_box(&dusty), Some(&scene.image), eval)?);
            Ok(())
        })?;
        rows.push(row(OPERATIONS[1], size, samples));
    }
    rows.sort_by(|a, b| {
        let rank = |r: &TimingRow| OPERATIONS.iter().position(|o| *o == r.operation);
        rank(a).cmp(&rank(b)).then(a.size.cmp(&b.size))
    });
    Ok(TimingReport {
        repetitions,
        warmup,
        seed,
        clock: "monotonic".into(),
        rows,
    })
}

fn row(operation: &str, size: usize, samples: Vec<f64>) -> TimingRow {
    TimingRow {
        operation: operation.into(),
        size,
        mean_seconds: mean(&samples),
        samples,
    }
}

impl TimingReport {
    /// Largest gap between a reported mean and the mean of its samples.
    pub fn mean_discrepancy(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (mean(&r.samples) - r.mean_seconds).abs())
            .fold(0.0, f64::max)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.rows.iter().map(|r| r.size).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn get(&self, operation: &str, size: usize) -> Option<&TimingRow> {
        self.rows.iter().find(|r| r.operation == operation && r.size == size)
    }

    /// One row per image size, one column of mean seconds per operation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("size");
        for op in OPERATIONS {
            let _ = write!(out, ",{op}_mean_s");
        }
        out.push('\n');
        for size in self.sizes() {
            let _ = write!(out, "{size}x{size}");
            for op in OPERATIONS {
                match self.get(op, size) {
                    Some(r) => {
                        let _ = write!(out, ",{}", r.mean_seconds);
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}
