//! CIE94 and CIEDE2000 color differences.
//!
//! Both take the reference color first; CIE94 weights chroma and hue by the
//! reference chroma, CIEDE2000 is symmetric.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::imaging::{srgb_to_lab, ImageRgb};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaEFormula {
    #[serde(rename = "CIE94", alias = "cie94")]
    Cie94,
    #[serde(rename = "CIEDE2000", alias = "ciede2000")]
    Ciede2000,
}

/// CIE94 with graphic-arts constants (kL = kC = kH = 1, K1 = 0.045, K2 = 0.015).
pub fn cie94(reference: [f64; 3], sample: [f64; 3]) -> f64 {
    let [l1, a1, b1] = reference;
    let [l2, a2, b2] = sample;
    let c1 = a1.hypot(b1);
    let c2 = a2.hypot(b2);
    let dl = l1 - l2;
    let dc = c1 - c2;
    let (da, db) = (a1 - a2, b1 - b2);
    let dh2 = (da * da + db * db - dc * dc).max(0.0);
    let sc = 1.0 + 0.045 * c1;
    let sh = 1.0 + 0.015 * c1;
    (dl * dl + (dc / sc).powi(2) + dh2 / (sh * sh)).sqrt()
}

/// CIEDE2000 with kL = kC = kH = 1, including the blue-region rotation term.
pub fn ciede2000(reference: [f64; 3], sample: [f64; 3]) -> f64 {
    let [l1, a1, b1] = reference;
    let [l2, a2, b2] = sample;

    let c_ab = 0.5 * (a1.hypot(b1) + a2.hypot(b2));
    let c7 = c_ab.powi(7);
    let g = 0.5 * (1.0 - (c7 / (c7 + 25f64.powi(7))).sqrt());
    let a1p = (1.0 + g) * a1;
    let a2p = (1.0 + g) * a2;
    let c1p = a1p.hypot(b1);
    let c2p = a2p.hypot(b2);
    let h1p = hue_degrees(b1, a1p);
    let h2p = hue_degrees(b2, a2p);

    let dlp = l2 - l1;
    let dcp = c2p - c1p;
    let chroma_product = c1p * c2p;
    let dhp = if chroma_product == 0.0 {
        0.0
    } else {
        let d = h2p - h1p;
        if d > 180.0 {
            d - 360.0
        } else if d < -180.0 {
            d + 360.0
        } else {
            d
        }
    };
    let dhp_big = 2.0 * chroma_product.sqrt() * (dhp.to_radians() * 0.5).sin();

    let lp_bar = 0.5 * (l1 + l2);
    let cp_bar = 0.5 * (c1p + c2p);
    let hp_bar = if chroma_product == 0.0 {
        h1p + h2p
    } else if (h1p - h2p).abs() <= 180.0 {
        0.5 * (h1p + h2p)
    } else if h1p + h2p < 360.0 {
        0.5 * (h1p + h2p + 360.0)
    } else {
        0.5 * (h1p + h2p - 360.0)
    };

    let t = 1.0 - 0.17 * (hp_bar - 30.0).to_radians().cos()
        + 0.24 * (2.0 * hp_bar).to_radians().cos()
        + 0.32 * (3.0 * hp_bar + 6.0).to_radians().cos()
        - 0.20 * (4.0 * hp_bar - 63.0).to_radians().cos();
    let d_theta = 30.0 * (-((hp_bar - 275.0) / 25.0).powi(2)).exp();
    let cp7 = cp_bar.powi(7);
    let r_c = 2.0 * (cp7 / (cp7 + 25f64.powi(7))).sqrt();
    let l50 = (lp_bar - 50.0).powi(2);
    let s_l = 1.0 + 0.015 * l50 / (20.0 + l50).sqrt();
    let s_c = 1.0 + 0.045 * cp_bar;
    let s_h = 1.0 + 0.015 * cp_bar * t;
    let r_t = -(2.0 * d_theta).to_radians().sin() * r_c;

    let tl = dlp / s_l;
    let tc = dcp / s_c;
    let th = dhp_big / s_h;
    (tl * tl + tc * tc + th * th + r_t * tc * th).sqrt()
}

fn hue_degrees(b: f64, a: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    let h = b.atan2(a).to_degrees();
    if h < 0.0 {
        h + 360.0
    } else {
        h
    }
}

pub fn delta_e(formula: DeltaEFormula, reference: [f64; 3], sample: [f64; 3]) -> f64 {
    match formula {
        DeltaEFormula::Cie94 => cie94(reference, sample),
        DeltaEFormula::Ciede2000 => ciede2000(reference, sample),
    }
}

/// Mean per-pixel color difference in CIELAB, `reference` as the anchor.
pub fn color_difference(test: &ImageRgb, reference: &ImageRgb, formula: DeltaEFormula) -> Result<f64> {
    test.ensure_same_dims(reference)?;
    if test.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = test
        .pixels()
        .iter()
        .zip(reference.pixels())
        .map(|(&t, &r)| {
            if t == r {
                0.0
            } else {
                delta_e(formula, srgb_to_lab(r), srgb_to_lab(t))
            }
        })
        .sum();
    Ok(total / test.len() as f64)
}
