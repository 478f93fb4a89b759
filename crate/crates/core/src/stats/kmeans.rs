//! Lloyd's k-means on CIELAB samples with k-means++ seeding.
//!
//! The objective is the within-cluster sum of squares
//! `L = sum_i ||x_i - mu_{c_i}||^2`, minimized by alternating nearest-center
//! assignment and mean updates until the loss settles.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{rgb_to_lab, ImageRgb};

pub type Lab = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the relative loss decrease falls below this value.
    pub tol: f64,
    /// Independent k-means++ initializations; the run with the lowest final
    /// loss is kept.
    pub restarts: usize,
}

impl Default for KmeansConfig {
    fn default() -> Self {
        Self {
            k: 15,
            seed: 0,
            max_iter: 300,
            tol: 1e-9,
            restarts: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterResult {
    pub k: usize,
    pub centers: Vec<Lab>,
    pub assignments: Vec<usize>,
    pub counts: Vec<usize>,
    pub loss: f64,
    pub iterations: usize,
    /// True when assignments stopped changing or the loss settled within `tol`.
    pub converged: bool,
    /// Loss after each assignment step.
    pub loss_history: Vec<f64>,
    /// RMS distance of the centers from their best-fit line in the (a, b) plane.
    pub collinearity_residual: Option<f64>,
}

#[inline]
pub fn dist2(a: &Lab, b: &Lab) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    d0 * d0 + d1 * d1 + d2 * d2
}

/// Index of the nearest center; ties resolve to the lowest index.
#[inline]
pub fn nearest(x: &Lab, centers: &[Lab]) -> (usize, f64) {
    let mut best = (0, dist2(x, &centers[0]));
    for (j, c) in centers.iter().enumerate().skip(1) {
        let d = dist2(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn key(x: &Lab) -> [u64; 3] {
    // fold -0.0 into 0.0
    x.map(|v| (v + 0.0).to_bits())
}

pub fn distinct_count(samples: &[Lab]) -> usize {
    samples.iter().map(key).collect::<HashSet<_>>().len()
}

fn seed_centers(samples: &[Lab], k: usize, rng: &mut ChaCha8Rng) -> Vec<Lab> {
    let n = samples.len();
    let mut centers = Vec::with_capacity(k);
    centers.push(samples[rng.random_range(0..n)]);
    let mut d2: Vec<f64> = samples.iter().map(|x| dist2(x, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in d2.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
        let c = samples[pick.expect("fewer distinct samples than k")];
        for (i, x) in samples.iter().enumerate() {
            d2[i] = d2[i].min(dist2(x, &c));
        }
        centers.push(c);
    }
    centers
}

/// Runs k-means on `samples`. Deterministic for a fixed config.
pub fn kmeans_lab(samples: &[Lab], config: &KmeansConfig) -> Result<ClusterResult> {
    let k = config.k;
    if samples.is_empty() {
        return Err(Error::EmptyInput("k-means needs at least one sample".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(config.tol.is_finite() && config.tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be >= 0, got {}",
            config.tol
        )));
    }
    if samples.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("samples must be finite".into()));
    }
    let distinct = distinct_count(samples);
    if k > distinct {
        return Err(Error::TooFewDistinct { k, distinct });
    }

    let mut best: Option<ClusterResult> = None;
    for run in 0..config.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(run as u64);
        let result = lloyd(samples, config, &mut rng);
        if best.as_ref().is_none_or(|b| result.loss < b.loss) {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one run"))
}

fn lloyd(samples: &[Lab], config: &KmeansConfig, rng: &mut ChaCha8Rng) -> ClusterResult {
    let k = config.k;
    let mut centers = seed_centers(samples, k, rng);
    let n = samples.len();
    let mut assignments = vec![usize::MAX; n];
    let mut loss_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=config.max_iter.max(1) {
        iterations = iter;
        let mut changed = 0usize;
        let mut loss = 0.0;
        for (x, slot) in samples.iter().zip(assignments.iter_mut()) {
            let (j, d) = nearest(x, &centers);
            if *slot != j {
                *slot = j;
                changed += 1;
            }
            loss += d;
        }
        let previous = loss_history.last().copied();
        loss_history.push(loss);
        if changed == 0 {
            converged = true;
            break;
        }
        if let Some(prev) = previous {
            if prev - loss <= config.tol * prev.max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
        if iter == config.max_iter.max(1) {
            break;
        }
        update_centers(samples, &assignments, &mut centers);
    }

    let loss = samples
        .iter()
        .zip(&assignments)
        .map(|(x, &j)| dist2(x, &centers[j]))
        .sum();
    let mut counts = vec![0usize; k];
    for &j in &assignments {
        counts[j] += 1;
    }
    let collinearity_residual = (k >= 2).then(|| chroma_line_residual(&centers));
    ClusterResult {
        k,
        centers,
        assignments,
        counts,
        loss,
        iterations,
        converged,
        loss_history,
        collinearity_residual,
    }
}

/// Moves every center to the mean of its members. An empty cluster is
/// re-seeded at the sample farthest from its own center.
fn update_centers(samples: &[Lab], assignments: &[usize], centers: &mut [Lab]) {
    let k = centers.len();
    let mut sums = vec![[0.0f64; 3]; k];
    let mut counts = vec![0usize; k];
    for (x, &j) in samples.iter().zip(assignments) {
        for c in 0..3 {
            sums[j][c] += x[c];
        }
        counts[j] += 1;
    }
    let empty: Vec<usize> = (0..k).filter(|&j| counts[j] == 0).collect();
    for j in 0..k {
        if counts[j] > 0 {
            let n = counts[j] as f64;
            centers[j] = sums[j].map(|s| s / n);
        }
    }
    if empty.is_empty() {
        return;
    }
    let mut far: Vec<(f64, usize)> = samples
        .iter()
        .zip(assignments)
        .enumerate()
        .map(|(i, (x, &j))| (dist2(x, &centers[j]), i))
        .collect();
    far.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut used = HashSet::new();
    let mut candidates = far.into_iter().map(|(_, i)| samples[i]).filter(|x| used.insert(key(x)));
    for j in empty {
        if let Some(x) = candidates.next() {
            centers[j] = x;
        }
    }
}

/// RMS perpendicular distance of points from their total-least-squares line
/// in the (a, b) chroma plane. Requires at least two points.
pub fn chroma_line_residual(points: &[Lab]) -> f64 {
    let n = points.len() as f64;
    let (ma, mb) = points.iter().fold((0.0, 0.0), |(sa, sb), p| (sa + p[1], sb + p[2]));
    let (ma, mb) = (ma / n, mb / n);
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for p in points {
        let (da, db) = (p[1] - ma, p[2] - mb);
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    // principal axis of the scatter matrix
    let theta = 0.5 * (2.0 * sab).atan2(saa - sbb);
    let (s, c) = theta.sin_cos();
    let sq: f64 = points
        .iter()
        .map(|p| {
            let d = (p[1] - ma) * s - (p[2] - mb) * c;
            d * d
        })
        .sum();
    (sq / n).sqrt()
}

pub fn cluster_linearity(result: &ClusterResult) -> Result<f64> {
    if result.centers.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "collinearity needs at least 2 centers, got {}",
            result.centers.len()
        )));
    }
    Ok(chroma_line_residual(&result.centers))
}

/// Converts an image to LAB samples, uniformly subsampling (seeded) when it
/// has more than `cap` pixels.
pub fn lab_samples(image: &ImageRgb, cap: usize, seed: u64) -> Vec<Lab> {
    let lab = rgb_to_lab(image);
    let px = lab.pixels();
    if cap == 0 || px.len() <= cap {
        return px.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, px.len(), cap).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| px[i]).collect()
}

impl ClusterResult {
    /// `cluster_id,L,a,b,count` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cluster_id,L,a,b,count\n");
        for (j, c) in self.centers.iter().enumerate() {
            let _ = writeln!(out, "{j},{},{},{},{}", c[0], c[1], c[2], self.counts[j]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_colors_fit_exactly() {
        let a = [30.0, 10.0, -5.0];
        let b = [70.0, -20.0, 40.0];
        let samples: Vec<Lab> = (0..20).map(|i| if i % 3 == 0 { a } else { b }).collect();
        let r = kmeans_lab(
            &samples,
            &KmeansConfig {
                k: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.loss, 0.0);
        let mut centers = r.centers.clone();
        centers.sort_by(|x, y| x[0].total_cmp(&y[0]));
        assert_eq!(centers, vec![a, b]);
    }

    #[test]
    fn single_cluster_is_mean() {
        let samples: Vec<Lab> = (0..10).map(|i| [i as f64, (i * i) as f64, -(i as f64)]).collect();
        let r = kmeans_lab(
            &samples,
            &KmeansConfig {
                k: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let mean: Lab = std::array::from_fn(|c| samples.iter().map(|x| x[c]).sum::<f64>() / 10.0);
        let ss: f64 = samples.iter().map(|x| dist2(x, &mean)).sum();
        for (got, want) in r.centers[0].iter().zip(mean) {
            assert!((got - want).abs() < 1e-9);
        }
        assert!((r.loss - ss).abs() < 1e-9 * ss);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            kmeans_lab(&[], &KmeansConfig::default()),
            Err(Error::EmptyInput(_))
        ));
        let two = vec![[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        assert!(matches!(
            kmeans_lab(
                &two,
                &KmeansConfig {
                    k: 3,
                    ..Default::default()
                }
            ),
            Err(Error::TooFewDistinct { k: 3, distinct: 2 })
        ));
    }

    #[test]
    fn collinear_centers_have_zero_residual() {
        let pts: Vec<Lab> = (0..6)
            .map(|i| [50.0, i as f64 * 3.7 - 4.0, i as f64 * 3.7 - 4.0])
            .collect();
        assert!(chroma_line_residual(&pts) < 1e-9);
        let flat: Vec<Lab> = (0..4).map(|i| [50.0, i as f64, 2.0]).collect();
        assert!(chroma_line_residual(&flat) < 1e-12);
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let centers = [[0.0, -1.0, 0.0], [0.0, 1.0, 0.0]];
        assert_eq!(nearest(&[0.0, 0.0, 0.0], &centers).0, 0);
    }

    #[test]
    fn subsampling_is_seeded() {
        let img = ImageRgb::from_fn(40, 40, |x, y| [x as f64 / 40.0, y as f64 / 40.0, 0.5]);
        let a = lab_samples(&img, 100, 9);
        assert_eq!(a.len(), 100);
        assert_eq!(a, lab_samples(&img, 100, 9));
        assert_eq!(lab_samples(&img, 0, 9).len(), 1600);
    }
}
