//! Reference values and brute-force oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use dustsynth::imaging::ImageRgb;
use dustsynth::stats::Lab;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Published CIEDE2000 verification pairs with the expected difference and
/// an independent recomputation (scikit-image `deltaE_ciede2000`).
pub const CIEDE2000_PAIRS: [([f64; 3], [f64; 3], f64, f64); 34] = [
    ([50.0, 2.6772, -79.7751], [50.0, 0.0, -82.7485], 2.0425, 2.042459680157),
    ([50.0, 3.1571, -77.2803], [50.0, 0.0, -82.7485], 2.8615, 2.861510174748),
    ([50.0, 2.8361, -74.0200], [50.0, 0.0, -82.7485], 3.4412, 3.441190598691),
    ([50.0, -1.3802, -84.2814], [50.0, 0.0, -82.7485], 1.0000, 0.999998864752),
    ([50.0, -1.1848, -84.8006], [50.0, 0.0, -82.7485], 1.0000, 1.000004701074),
    ([50.0, -0.9009, -85.5211], [50.0, 0.0, -82.7485], 1.0000, 1.000012967624),
    ([50.0, 0.0, 0.0], [50.0, -1.0, 2.0], 2.3669, 2.366858819172),
    ([50.0, -1.0, 2.0], [50.0, 0.0, 0.0], 2.3669, 2.366858819172),
    ([50.0, 2.49, -0.001], [50.0, -2.49, 0.0009], 7.1792, 7.179172011349),
    ([50.0, 2.49, -0.001], [50.0, -2.49, 0.0010], 7.1792, 7.179162640002),
    ([50.0, 2.49, -0.001], [50.0, -2.49, 0.0011], 7.2195, 7.219472152286),
    ([50.0, 2.49, -0.001], [50.0, -2.49, 0.0012], 7.2195, 7.219474212471),
    ([50.0, -0.001, 2.49], [50.0, 0.0009, -2.49], 4.8045, 4.804521685775),
    ([50.0, -0.001, 2.49], [50.0, 0.0010, -2.49], 4.8045, 4.804524508212),
    ([50.0, -0.001, 2.49], [50.0, 0.0011, -2.49], 4.7461, 4.746071113807),
    ([50.0, 2.5, 0.0], [50.0, 0.0, -2.5], 4.3065, 4.306482095827),
    ([50.0, 2.5, 0.0], [73.0, 25.0, -18.0], 27.1492, 27.149231300746),
    ([50.0, 2.5, 0.0], [61.0, -5.0, 29.0], 22.8977, 22.897692469807),
    ([50.0, 2.5, 0.0], [56.0, -27.0, -3.0], 31.9030, 31.903004646864),
    ([50.0, 2.5, 0.0], [58.0, 24.0, 15.0], 19.4535, 19.453521433393),
    ([50.0, 2.5, 0.0], [50.0, 3.1736, 0.5854], 1.0000, 1.000026343370),
    ([50.0, 2.5, 0.0], [50.0, 3.2972, 0.0], 1.0000, 0.999972872973),
    ([50.0, 2.5, 0.0], [50.0, 1.8634, 0.5757], 1.0000, 1.000049498977),
    ([50.0, 2.5, 0.0], [50.0, 3.2592, 0.3350], 1.0000, 1.000034761715),
    (
        [60.2574, -34.0099, 36.2677],
        [60.4626, -34.1751, 39.4387],
        1.2644,
        1.264420013599,
    ),
    (
        [63.0109, -31.0961, -5.8663],
        [62.8187, -29.7946, -4.0864],
        1.2630,
        1.262959298262,
    ),
    (
        [61.2901, 3.7196, -5.3901],
        [61.4292, 2.2480, -4.9620],
        1.8731,
        1.873070500118,
    ),
    (
        [35.0831, -44.1164, 3.7933],
        [35.0232, -40.0716, 1.5901],
        1.8645,
        1.864495234159,
    ),
    (
        [22.7233, 20.0904, -46.6940],
        [23.0331, 14.9730, -42.5619],
        2.0373,
        2.037258269709,
    ),
    (
        [36.4612, 47.8580, 18.3852],
        [36.2715, 50.5065, 21.2231],
        1.4146,
        1.414577922494,
    ),
    (
        [90.8027, -2.0831, 1.4410],
        [91.1528, -1.6435, 0.0447],
        1.4441,
        1.444129078093,
    ),
    (
        [90.9257, -0.5406, -0.9208],
        [88.6381, -0.8985, -0.7239],
        1.5381,
        1.538117005440,
    ),
    (
        [6.7747, -0.2908, -2.4247],
        [5.8714, -0.0985, -2.2286],
        0.6377,
        0.637727671884,
    ),
    (
        [2.0776, 0.0795, -1.1350],
        [0.9033, -0.0636, -0.5514],
        0.9082,
        0.908232839603,
    ),
];

// direct windowed SSIM: explicit 2-D weights and centered moments per window
pub fn ssim_oracle(a: &ImageRgb, b: &ImageRgb) -> f64 {
    let (w, h) = a.dims();
    let y = |img: &ImageRgb, x: usize, yy: usize| {
        let p = img.pixel(x, yy);
        0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]
    };
    let n = 11usize;
    let mut weights = vec![vec![0.0; n]; n];
    let mut total = 0.0;
    for (u, row) in weights.iter_mut().enumerate() {
        for (v, wt) in row.iter_mut().enumerate() {
            let (du, dv) = (u as f64 - 5.0, v as f64 - 5.0);
            *wt = (-(du * du + dv * dv) / (2.0 * 1.5 * 1.5)).exp();
            total += *wt;
        }
    }
    let (c1, c2) = (0.01f64.powi(2), 0.03f64.powi(2));
    let mut sum = 0.0;
    let mut count = 0;
    for oy in 0..=h - n {
        for ox in 0..=w - n {
            let (mut ma, mut mb) = (0.0, 0.0);
            for u in 0..n {
                for v in 0..n {
                    let wt = weights[u][v] / total;
                    ma += wt * y(a, ox + v, oy + u);
                    mb += wt * y(b, ox + v, oy + u);
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for u in 0..n {
                for v in 0..n {
                    let wt = weights[u][v] / total;
                    let da = y(a, ox + v, oy + u) - ma;
                    let db = y(b, ox + v, oy + u) - mb;
                    va += wt * da * da;
                    vb += wt * db * db;
                    cov += wt * da * db;
                }
            }
            sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    sum / count as f64
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ImageRgb {
    ImageRgb::from_fn(w, h, |_, _| [rng.random(), rng.random(), rng.random()])
}

/// 15 centers on a 3x5 grid spaced 10 apart, `per` Gaussian samples each.
pub fn planted_blobs(seed: u64, per: usize, sigma: f64) -> (Vec<Lab>, Vec<Lab>) {
    let centers: Vec<Lab> = (0..15)
        .map(|i| {
            [
                50.0 + 10.0 * (i / 5) as f64,
                -20.0 + 10.0 * (i % 5) as f64,
                5.0 * (i % 2) as f64,
            ]
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let samples = centers
        .iter()
        .flat_map(|c| {
            (0..per)
                .map(|_| c.map(|v| v + noise.sample(&mut rng)))
                .collect::<Vec<_>>()
        })
        .collect();
    (centers, samples)
}

/// Per-pair distances under the matching of `found` to `planted` with the
/// smallest total distance (exhaustive DP over subsets, fine for n <= 16).
pub fn optimal_matching(found: &[Lab], planted: &[Lab]) -> Vec<f64> {
    let n = planted.len();
    assert_eq!(found.len(), n);
    let dist = |i: usize, j: usize| {
        (0..3)
            .map(|c| (found[j][c] - planted[i][c]).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let full = 1usize << n;
    // cost[mask]: best total for planted 0..popcount(mask) using found centers in mask
    let mut cost = vec![f64::INFINITY; full];
    let mut choice = vec![usize::MAX; full];
    cost[0] = 0.0;
    for mask in 0..full {
        if !cost[mask].is_finite() {
            continue;
        }
        let i = mask.count_ones() as usize;
        if i == n {
            continue;
        }
        for j in 0..n {
            if mask & (1 << j) == 0 {
                let next = mask | (1 << j);
                let c = cost[mask] + dist(i, j);
                if c < cost[next] {
                    cost[next] = c;
                    choice[next] = j;
                }
            }
        }
    }
    let mut out = vec![0.0; n];
    let mut mask = full - 1;
    for i in (0..n).rev() {
        let j = choice[mask];
        out[i] = dist(i, j);
        mask &= !(1 << j);
    }
    out
}

/// RMS distance from the best line in the (a, b) plane, by scanning angles.
pub fn angle_scan_residual(points: &[Lab]) -> f64 {
    let n = points.len() as f64;
    let ma = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let mb = points.iter().map(|p| p[2]).sum::<f64>() / n;
    (0..200_000)
        .map(|i| {
            let th = std::f64::consts::PI * i as f64 / 200_000.0;
            let (s, c) = th.sin_cos();
            let sq: f64 = points.iter().map(|p| ((p[1] - ma) * s - (p[2] - mb) * c).powi(2)).sum();
            (sq / n).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}
