//! Seeded synthetic scenes with matching depth, for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::imaging::{DepthMap, ImageRgb};

/// A clear image with its normalized depth map.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub image: ImageRgb,
    pub depth: DepthMap,
}

struct Blob {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
    color: [f64; 3],
}

const HUES: [[f64; 3]; 8] = [
    [0.80, 0.20, 0.20],
    [0.85, 0.75, 0.20],
    [0.25, 0.65, 0.30],
    [0.20, 0.35, 0.80],
    [0.60, 0.25, 0.70],
    [0.20, 0.70, 0.75],
    [0.90, 0.50, 0.15],
    [0.45, 0.80, 0.55],
];

/// Outdoor-like scene: a sky gradient over textured ground with colored
/// objects. Channel means are equalized so the image shows no color cast,
/// and depth grows from the bottom edge to the horizon, with the sky
/// farthest.
pub fn balanced_outdoor(seed: u64, width: usize, height: usize) -> Result<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (wf, hf) = (width as f64, height as f64);
    let horizon = hf * rng.random_range(0.3..0.45);
    let sky_top = [
        rng.random_range(0.4..0.5),
        rng.random_range(0.55..0.65),
        rng.random_range(0.72..0.82),
    ];
    let sky_low = [0.74, 0.77, 0.8];
    let ground_a = [
        rng.random_range(0.25..0.4),
        rng.random_range(0.45..0.6),
        rng.random_range(0.28..0.36),
    ];
    let ground_b = [
        rng.random_range(0.5..0.65),
        rng.random_range(0.35..0.45),
        rng.random_range(0.3..0.38),
    ];
    let stripe = rng.random_range(0.05..0.15);

    let mut blobs: Vec<Blob> = (0..rng.random_range(5..9))
        .map(|_| {
            let base = HUES[rng.random_range(0..HUES.len())];
            let k = rng.random_range(0.8..1.1);
            Blob {
                cx: wf * rng.random_range(0.05..0.95),
                cy: horizon + (hf - horizon) * rng.random_range(0.1..0.9),
                rx: wf * rng.random_range(0.05..0.15),
                ry: hf * rng.random_range(0.05..0.15),
                color: base.map(|v| (v * k).min(1.0)),
            }
        })
        .collect();
    // far objects first so nearer ones overdraw them
    blobs.sort_by(|a, b| a.cy.total_cmp(&b.cy));

    let ground_depth = |y: f64| ((hf - y) / (hf - horizon)).clamp(0.0, 1.0) * 0.9;
    let mut pixels = Vec::with_capacity(width * height);
    let mut depth = Vec::with_capacity(width * height);
    for y in 0..height {
        let yf = y as f64 + 0.5;
        for x in 0..width {
            let xf = x as f64 + 0.5;
            let (mut px, mut d) = if yf < horizon {
                let s = yf / horizon;
                (std::array::from_fn(|c| sky_top[c] + (sky_low[c] - sky_top[c]) * s), 1.0)
            } else {
                let g = ground_depth(yf);
                let m = 0.5 + 0.5 * ((xf * stripe + g * 9.0).sin());
                (
                    std::array::from_fn(|c| ground_a[c] + (ground_b[c] - ground_a[c]) * m),
                    g,
                )
            };
            for blob in &blobs {
                let u = (xf - blob.cx) / blob.rx;
                let v = (yf - blob.cy) / blob.ry;
                if u * u + v * v <= 1.0 {
                    let shade = 1.0 - 0.25 * (u + v).clamp(-1.0, 1.0).abs();
                    px = blob.color.map(|c| c * shade);
                    d = ground_depth(blob.cy + blob.ry);
                }
            }
            let n = rng.random_range(-0.04..0.04);
            pixels.push(px.map(|v: f64| v + n));
            depth.push(d);
        }
    }

    // remove any overall color cast
    let count = pixels.len().max(1) as f64;
    let mut mean = [0.0; 3];
    for px in &pixels {
        for c in 0..3 {
            mean[c] += px[c] / count;
        }
    }
    let gray = (mean[0] + mean[1] + mean[2]) / 3.0;
    let image = ImageRgb::from_fn(width, height, |x, y| {
        let px = pixels[y * width + x];
        std::array::from_fn(|c| px[c] - mean[c] + gray)
    });
    Ok(Scene {
        image,
        depth: DepthMap::normalized(width, height, &depth)?,
    })
}

/// Horizontal luminance gradient plus uniform noise, depth following the
/// gradient. Used for timing runs.
pub fn noise_gradient(seed: u64, width: usize, height: usize) -> Result<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = width.saturating_sub(1).max(1) as f64;
    let mut pixels = Vec::with_capacity(width * height);
    for _ in 0..height {
        for x in 0..width {
            let g = 0.2 + 0.6 * x as f64 / span;
            pixels.push([
                g + rng.random_range(-0.1..0.1),
                g + rng.random_range(-0.1..0.1),
                g + rng.random_range(-0.1..0.1),
            ]);
        }
    }
    let image = ImageRgb::from_fn(width, height, |x, y| pixels[y * width + x]);
    let depth = DepthMap::from_fn(width, height, |x, _| x as f64 / span);
    Ok(Scene { image, depth })
}
