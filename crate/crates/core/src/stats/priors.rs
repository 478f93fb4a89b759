//! Checks for the three color priors of sandstorm imagery: channel means are
//! mutually displaced (shifting), each channel is narrow (concentration), and
//! the means are ordered R > G > B (sequential).

use serde::{Deserialize, Serialize};

use super::histogram::{channel_means, channel_std};
use crate::imaging::ImageRgb;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorThresholds {
    /// Largest per-channel standard deviation still counted as concentrated.
    pub sigma_max: f64,
    /// Smallest pairwise channel-mean gap counted as shifted.
    pub delta_min: f64,
}

impl Default for PriorThresholds {
    fn default() -> Self {
        Self {
            sigma_max: 0.18,
            delta_min: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorReport {
    pub means: [f64; 3],
    pub sequential_ok: bool,
    pub concentration_scores: [f64; 3],
    pub shifting_score: f64,
    pub thresholds: PriorThresholds,
    pub verdict: bool,
}

pub fn prior_characteristics(image: &ImageRgb, thresholds: PriorThresholds) -> PriorReport {
    let means = channel_means(image);
    let sigma = channel_std(image, means);
    let [r, g, b] = means;
    let sequential_ok = r > g && g > b;
    let shifting_score = (r - g).abs().min((g - b).abs()).min((r - b).abs());
    let concentrated = sigma.iter().all(|&s| s <= thresholds.sigma_max);
    PriorReport {
        means,
        sequential_ok,
        concentration_scores: sigma,
        shifting_score,
        thresholds,
        verdict: sequential_ok && concentrated && shifting_score >= thresholds.delta_min,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_fails() {
        let img = ImageRgb::filled(3, 3, [0.4; 3]).unwrap();
        let r = prior_characteristics(&img, PriorThresholds::default());
        assert!(!r.sequential_ok);
        assert_eq!(r.shifting_score, 0.0);
        assert!(!r.verdict);
    }

    #[test]
    fn ordered_constant_passes() {
        let img = ImageRgb::filled(3, 3, [0.8, 0.5, 0.2]).unwrap();
        let r = prior_characteristics(&img, PriorThresholds::default());
        assert!(r.sequential_ok);
        assert_eq!(r.concentration_scores, [0.0; 3]);
        assert!((r.shifting_score - 0.3).abs() < 1e-12);
        assert!(r.verdict);
    }

    #[test]
    fn wide_channels_fail_concentration() {
        let img = ImageRgb::from_fn(10, 10, |x, _| {
            let v = if x % 2 == 0 { 0.1 } else { 0.9 };
            [v, v * 0.8, v * 0.5]
        });
        let r = prior_characteristics(&img, PriorThresholds::default());
        assert!(r.sequential_ok);
        assert!(!r.verdict);
    }
}
