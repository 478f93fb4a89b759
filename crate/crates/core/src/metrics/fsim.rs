//! Feature similarity (FSIM) and its chromatic extension (FSIMc).
//!
//! Luma phase congruency from a log-Gabor filter bank and Scharr gradient
//! magnitude are compared pointwise, multiplied with the I/Q chrominance
//! similarity for FSIMc, and pooled with the larger phase congruency of the
//! two images as weight. Inputs are mapped to YIQ on the 0-255 scale and
//! box-downsampled when the short side exceeds 256 pixels.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::ImageRgb;

pub const FSIM_MIN_SIDE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FsimConfig {
    pub scales: usize,
    pub orientations: usize,
    pub min_wavelength: f64,
    pub mult: f64,
    pub sigma_onf: f64,
    /// Ratio of angular spacing to the angular spread of each filter.
    pub d_theta_on_sigma: f64,
    /// Noise threshold in standard deviations above the mean noise energy.
    pub noise_k: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub lambda: f64,
}

impl Default for FsimConfig {
    fn default() -> Self {
        Self {
            scales: 4,
            orientations: 4,
            min_wavelength: 6.0,
            mult: 2.0,
            sigma_onf: 0.55,
            d_theta_on_sigma: 1.2,
            noise_k: 2.0,
            t1: 0.85,
            t2: 160.0,
            t3: 200.0,
            t4: 200.0,
            lambda: 0.03,
        }
    }
}

impl FsimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.min_wavelength,
            self.mult,
            self.sigma_onf,
            self.d_theta_on_sigma,
            self.t1,
            self.t2,
            self.t3,
            self.t4,
            self.lambda,
        ];
        if self.scales == 0 || self.orientations == 0 || positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("FSIM parameters must be positive".into()));
        }
        if self.sigma_onf >= 1.0 {
            return Err(Error::InvalidParameter("FSIM sigma_onf must be below 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FsimScores {
    /// Luma-only feature similarity.
    pub fsim: f64,
    /// Feature similarity including the chrominance term.
    pub fsimc: f64,
}

pub fn fsimc(test: &ImageRgb, reference: &ImageRgb, cfg: &FsimConfig) -> Result<f64> {
    Ok(fsim_scores(test, reference, cfg)?.fsimc)
}

pub fn fsim(test: &ImageRgb, reference: &ImageRgb, cfg: &FsimConfig) -> Result<f64> {
    Ok(fsim_scores(test, reference, cfg)?.fsim)
}

pub fn fsim_scores(test: &ImageRgb, reference: &ImageRgb, cfg: &FsimConfig) -> Result<FsimScores> {
    cfg.validate()?;
    test.ensure_same_dims(reference)?;
    let (w, h) = test.dims();
    if w.min(h) < FSIM_MIN_SIDE {
        return Err(Error::TooSmall(format!(
            "FSIM needs at least {FSIM_MIN_SIDE}x{FSIM_MIN_SIDE}, got {w}x{h}"
        )));
    }
    let factor = ((w.min(h) as f64 / 256.0).round() as usize).max(1);
    let [y1, i1, q1] = yiq(reference).map(|p| downsample(&p, w, h, factor));
    let [y2, i2, q2] = yiq(test).map(|p| downsample(&p, w, h, factor));
    let (dw, dh) = (w.div_ceil(factor), h.div_ceil(factor));

    let bank = FilterBank::new(dw, dh, cfg);
    let pc1 = bank.phase_congruency(&y1, cfg);
    let pc2 = bank.phase_congruency(&y2, cfg);
    let g1 = scharr_magnitude(&y1, dw, dh);
    let g2 = scharr_magnitude(&y2, dw, dh);

    let sim = |a: f64, b: f64, t: f64| (2.0 * a * b + t) / (a * a + b * b + t);
    let mut num = 0.0;
    let mut num_c = 0.0;
    let mut den = 0.0;
    let mut plain = 0.0;
    let mut plain_c = 0.0;
    for k in 0..dw * dh {
        let s_l = sim(pc1[k], pc2[k], cfg.t1) * sim(g1[k], g2[k], cfg.t2);
        let s_c = real_power(sim(i1[k], i2[k], cfg.t3) * sim(q1[k], q2[k], cfg.t4), cfg.lambda);
        let pcm = pc1[k].max(pc2[k]);
        num += s_l * pcm;
        num_c += s_l * s_c * pcm;
        den += pcm;
        plain += s_l;
        plain_c += s_l * s_c;
    }
    if den > 0.0 {
        Ok(FsimScores {
            fsim: num / den,
            fsimc: num_c / den,
        })
    } else {
        // no phase structure anywhere: fall back to unweighted pooling
        let n = (dw * dh) as f64;
        Ok(FsimScores {
            fsim: plain / n,
            fsimc: plain_c / n,
        })
    }
}

// real part of the principal power, as for a negative base raised to lambda
fn real_power(x: f64, lambda: f64) -> f64 {
    if x >= 0.0 {
        x.powf(lambda)
    } else {
        (-x).powf(lambda) * (lambda * std::f64::consts::PI).cos()
    }
}

fn yiq(image: &ImageRgb) -> [Vec<f64>; 3] {
    let mut y = Vec::with_capacity(image.len());
    let mut i = Vec::with_capacity(image.len());
    let mut q = Vec::with_capacity(image.len());
    for px in image.pixels() {
        let [r, g, b] = px.map(|v| v * 255.0);
        y.push(0.299 * r + 0.587 * g + 0.114 * b);
        i.push(0.596 * r - 0.274 * g - 0.322 * b);
        q.push(0.211 * r - 0.523 * g + 0.312 * b);
    }
    [y, i, q]
}

// F x F box average (zero padded, centered like a same-size convolution),
// then every F-th sample starting at the origin
fn downsample(plane: &[f64], w: usize, h: usize, f: usize) -> Vec<f64> {
    if f == 1 {
        return plane.to_vec();
    }
    let lo = (f / 2) as isize - (f as isize - 1);
    let hi = (f / 2) as isize;
    let norm = 1.0 / (f * f) as f64;
    let mut out = Vec::with_capacity(w.div_ceil(f) * h.div_ceil(f));
    for y in (0..h).step_by(f) {
        for x in (0..w).step_by(f) {
            let mut s = 0.0;
            for yy in (y as isize + lo)..=(y as isize + hi) {
                if yy < 0 || yy >= h as isize {
                    continue;
                }
                for xx in (x as isize + lo)..=(x as isize + hi) {
                    if xx >= 0 && xx < w as isize {
                        s += plane[yy as usize * w + xx as usize];
                    }
                }
            }
            out.push(s * norm);
        }
    }
    out
}

fn scharr_magnitude(plane: &[f64], w: usize, h: usize) -> Vec<f64> {
    let at = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            plane[y as usize * w + x as usize]
        }
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for (d, wt) in [(-1isize, 3.0), (0, 10.0), (1, 3.0)] {
                gx += wt * (at(x - 1, y + d) - at(x + 1, y + d));
                gy += wt * (at(x + d, y - 1) - at(x + d, y + 1));
            }
            out.push((gx * gx + gy * gy).sqrt() / 16.0);
        }
    }
    out
}

struct Fft2 {
    w: usize,
    h: usize,
    row_fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    col_fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    row_inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
    col_inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl Fft2 {
    fn new(w: usize, h: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            w,
            h,
            row_fwd: planner.plan_fft_forward(w),
            col_fwd: planner.plan_fft_forward(h),
            row_inv: planner.plan_fft_inverse(w),
            col_inv: planner.plan_fft_inverse(h),
        }
    }

    fn run(&self, data: &mut [Complex<f64>], inverse: bool) {
        let (w, h) = (self.w, self.h);
        let (rows, cols) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        rows.process(data);
        let mut t = vec![Complex::default(); w * h];
        for y in 0..h {
            for x in 0..w {
                t[x * h + y] = data[y * w + x];
            }
        }
        cols.process(&mut t);
        let scale = if inverse { 1.0 / (w * h) as f64 } else { 1.0 };
        for y in 0..h {
            for x in 0..w {
                data[y * w + x] = t[x * h + y] * scale;
            }
        }
    }
}

// normalized frequency of FFT bin j out of n, matching the usual
// "-n/2 .. n/2-1 over n" (even) or "over n-1" (odd) grid after ifftshift
fn bin_freq(j: usize, n: usize) -> f64 {
    let s = if j <= (n - 1) / 2 {
        j as f64
    } else {
        j as f64 - n as f64
    };
    let denom = if n % 2 == 1 { (n - 1) as f64 } else { n as f64 };
    s / denom
}

struct FilterBank {
    w: usize,
    h: usize,
    fft: Fft2,
    /// `filters[o][s]`, real-valued frequency responses.
    filters: Vec<Vec<Vec<f64>>>,
    /// Per orientation: energy of the finest filter, total squared and cross
    /// spatial filter responses used by the noise model.
    em_n: Vec<f64>,
    sum_an2: Vec<f64>,
    sum_aiaj: Vec<f64>,
}

impl FilterBank {
    fn new(w: usize, h: usize, cfg: &FsimConfig) -> Self {
        let n = w * h;
        let mut radius = vec![0.0; n];
        let mut sin_t = vec![0.0; n];
        let mut cos_t = vec![0.0; n];
        let mut lowpass = vec![0.0; n];
        for y in 0..h {
            let fy = bin_freq(y, h);
            for x in 0..w {
                let fx = bin_freq(x, w);
                let k = y * w + x;
                let r = fx.hypot(fy);
                lowpass[k] = 1.0 / (1.0 + (r / 0.45).powi(30));
                radius[k] = if k == 0 { 1.0 } else { r };
                let theta = (-fy).atan2(fx);
                sin_t[k] = theta.sin();
                cos_t[k] = theta.cos();
            }
        }
        let log_sigma2 = 2.0 * cfg.sigma_onf.ln().powi(2);
        let log_gabor: Vec<Vec<f64>> = (0..cfg.scales)
            .map(|s| {
                let fo = 1.0 / (cfg.min_wavelength * cfg.mult.powi(s as i32));
                let mut g: Vec<f64> = (0..n)
                    .map(|k| (-(radius[k] / fo).ln().powi(2) / log_sigma2).exp() * lowpass[k])
                    .collect();
                g[0] = 0.0;
                g
            })
            .collect();
        let theta_sigma = std::f64::consts::PI / cfg.orientations as f64 / cfg.d_theta_on_sigma;
        let fft = Fft2::new(w, h);
        let mut filters = Vec::with_capacity(cfg.orientations);
        let mut em_n = Vec::new();
        let mut sum_an2 = Vec::new();
        let mut sum_aiaj = Vec::new();
        for o in 0..cfg.orientations {
            let angle = o as f64 * std::f64::consts::PI / cfg.orientations as f64;
            let (sa, ca) = angle.sin_cos();
            let spread: Vec<f64> = (0..n)
                .map(|k| {
                    let ds = sin_t[k] * ca - cos_t[k] * sa;
                    let dc = cos_t[k] * ca + sin_t[k] * sa;
                    let dtheta = ds.atan2(dc).abs();
                    (-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma)).exp()
                })
                .collect();
            let bank: Vec<Vec<f64>> = log_gabor
                .iter()
                .map(|g| g.iter().zip(&spread).map(|(a, b)| a * b).collect())
                .collect();
            em_n.push(bank[0].iter().map(|v| v * v).sum());
            let spatial: Vec<Vec<f64>> = bank
                .iter()
                .map(|f| {
                    let mut buf: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
                    fft.run(&mut buf, true);
                    let s = (n as f64).sqrt();
                    buf.into_iter().map(|c| c.re * s).collect()
                })
                .collect();
            let mut an2 = 0.0;
            let mut aiaj = 0.0;
            for k in 0..n {
                for si in 0..spatial.len() {
                    an2 += spatial[si][k] * spatial[si][k];
                    for sj in si + 1..spatial.len() {
                        aiaj += spatial[si][k] * spatial[sj][k];
                    }
                }
            }
            sum_an2.push(an2);
            sum_aiaj.push(aiaj);
            filters.push(bank);
        }
        Self {
            w,
            h,
            fft,
            filters,
            em_n,
            sum_an2,
            sum_aiaj,
        }
    }

    fn phase_congruency(&self, plane: &[f64], cfg: &FsimConfig) -> Vec<f64> {
        const EPS: f64 = 1e-4;
        let n = self.w * self.h;
        let mut spectrum: Vec<Complex<f64>> = plane.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.fft.run(&mut spectrum, false);

        let mut energy_all = vec![0.0; n];
        let mut an_all = vec![0.0; n];
        for (o, bank) in self.filters.iter().enumerate() {
            let responses: Vec<Vec<Complex<f64>>> = bank
                .iter()
                .map(|f| {
                    let mut buf: Vec<Complex<f64>> = spectrum.iter().zip(f).map(|(c, &g)| c * g).collect();
                    self.fft.run(&mut buf, true);
                    buf
                })
                .collect();
            let mut energy = vec![0.0; n];
            for k in 0..n {
                let (mut se, mut so, mut sa) = (0.0, 0.0, 0.0);
                for r in &responses {
                    se += r[k].re;
                    so += r[k].im;
                    sa += r[k].norm();
                }
                an_all[k] += sa;
                let xe = (se * se + so * so).sqrt() + EPS;
                let (me, mo) = (se / xe, so / xe);
                energy[k] = responses
                    .iter()
                    .map(|r| {
                        let (e, od) = (r[k].re, r[k].im);
                        e * me + od * mo - (e * mo - od * me).abs()
                    })
                    .sum();
            }

            // noise floor from the median response of the finest scale
            let mut e2: Vec<f64> = responses[0].iter().map(|c| c.norm_sqr()).collect();
            let median_e2 = median(&mut e2);
            let mean_e2 = -median_e2 / 0.5f64.ln();
            let noise_power = mean_e2 / self.em_n[o];
            let est_energy2 = 2.0 * noise_power * self.sum_an2[o] + 4.0 * noise_power * self.sum_aiaj[o];
            let tau = (est_energy2 / 2.0).max(0.0).sqrt();
            let est_energy = tau * (std::f64::consts::PI / 2.0).sqrt();
            let est_sigma = ((2.0 - std::f64::consts::PI / 2.0) * tau * tau).sqrt();
            let threshold = (est_energy + cfg.noise_k * est_sigma) / 1.7;
            for k in 0..n {
                energy_all[k] += (energy[k] - threshold).max(0.0);
            }
        }
        energy_all
            .iter()
            .zip(&an_all)
            .map(|(&e, &a)| if a > 0.0 { e / a } else { 0.0 })
            .collect()
    }
}

fn median(v: &mut [f64]) -> f64 {
    let n = v.len();
    let mid = n / 2;
    let (_, &mut hi, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        hi
    } else {
        let lo = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize) -> ImageRgb {
        ImageRgb::from_fn(w, h, |x, y| {
            let (xf, yf) = (x as f64, y as f64);
            let v = 0.5 + 0.3 * (xf * 0.31).sin() * (yf * 0.17).cos() + 0.15 * ((xf + yf) * 0.9).sin();
            [v, 0.8 * v + 0.1, 0.3 + 0.4 * (yf / h as f64)]
        })
    }

    #[test]
    fn self_similarity_is_one() {
        let img = textured(48, 40);
        let s = fsim_scores(&img, &img, &FsimConfig::default()).unwrap();
        assert!((s.fsim - 1.0).abs() < 1e-12, "{s:?}");
        assert!((s.fsimc - 1.0).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn flat_images_fall_back() {
        let a = ImageRgb::filled(32, 32, [0.4; 3]).unwrap();
        let s = fsim_scores(&a, &a, &FsimConfig::default()).unwrap();
        assert!((s.fsimc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_small() {
        let a = ImageRgb::filled(31, 64, [0.4; 3]).unwrap();
        assert!(matches!(fsimc(&a, &a, &FsimConfig::default()), Err(Error::TooSmall(_))));
    }

    #[test]
    fn frequency_grid() {
        assert_eq!(bin_freq(0, 4), 0.0);
        assert_eq!(bin_freq(1, 4), 0.25);
        assert_eq!(bin_freq(2, 4), -0.5);
        assert_eq!(bin_freq(3, 4), -0.25);
        assert_eq!(bin_freq(2, 5), 0.5);
        assert_eq!(bin_freq(3, 5), -0.5);
    }

    #[test]
    fn downsample_box() {
        // 2x2 average over (x, x+1) after centering, zero beyond the edge
        let plane = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        let d = downsample(&plane, 3, 3, 2);
        assert_eq!(d.len(), 4);
        assert_eq!(d[0], (1.0 + 2.0 + 4.0 + 5.0) / 4.0);
        assert_eq!(d[1], (3.0 + 6.0) / 4.0);
        assert_eq!(d[3], 9.0 / 4.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn negative_power_takes_real_part() {
        assert!((real_power(-1.0, 0.5)).abs() < 1e-15);
        assert_eq!(real_power(4.0, 0.5), 2.0);
    }
}
