//! Restoration quality metrics: mean absolute error, mean squared error,
//! and normalized color difference in CIELAB space.
//!
//! All reductions run over pixels in row-major order with pairwise
//! summation, so results are reproducible to tight tolerance regardless of
//! image size. MAE and MSE accumulate exact small integers and are in fact
//! bit-reproducible.

use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::imagecore::{Pixel, RgbImage};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("reference image is all black: normalized color difference is undefined")]
    BlackReference,
}

fn check_dims(a: &RgbImage, b: &RgbImage) -> Result<(), MetricsError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MetricsError::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    Ok(())
}

/// Pairwise (cascade) summation: splits recursively, summing short runs
/// sequentially. Error grows like O(log n) instead of O(n).
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn per_pixel_sum<F: Fn(&Pixel, &Pixel) -> f64>(a: &RgbImage, b: &RgbImage, term: F) -> f64 {
    let terms: Vec<f64> = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(pa, pb)| term(pa, pb))
        .collect();
    pairwise_sum(&terms)
}

/// Mean absolute error per channel sample: the summed L1 distance divided
/// by three times the pixel count.
pub fn mae(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let total = per_pixel_sum(a, b, |pa, pb| {
        (0..3)
            .map(|ch| (pa[ch] as f64 - pb[ch] as f64).abs())
            .sum()
    });
    Ok(total / (3.0 * a.width() as f64 * a.height() as f64))
}

/// Mean squared error per channel sample.
pub fn mse(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let total = per_pixel_sum(a, b, |pa, pb| {
        (0..3)
            .map(|ch| {
                let d = pa[ch] as f64 - pb[ch] as f64;
                d * d
            })
            .sum()
    });
    Ok(total / (3.0 * a.width() as f64 * a.height() as f64))
}

// sRGB decoding and the BT.709/D65 primaries, then CIELAB against the D65
// white point (0.95047, 1.0, 1.08883).
const D65_WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];
const LAB_EPS: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

fn srgb_decode(v: u8) -> f64 {
    let c = v as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPS {
        t.cbrt()
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

/// Converts one sRGB pixel to CIELAB `[L, a, b]`.
pub fn rgb_to_lab(px: &Pixel) -> [f64; 3] {
    let r = srgb_decode(px[0]);
    let g = srgb_decode(px[1]);
    let b = srgb_decode(px[2]);

    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

    let fx = lab_f(x / D65_WHITE[0]);
    let fy = lab_f(y / D65_WHITE[1]);
    let fz = lab_f(z / D65_WHITE[2]);

    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

fn lab_norm(lab: [f64; 3]) -> f64 {
    (lab[0] * lab[0] + lab[1] * lab[1] + lab[2] * lab[2]).sqrt()
}

/// Normalized color difference: the summed CIELAB distance between pixel
/// pairs divided by the summed CIELAB magnitude of the reference image
/// `a`. Errors when the reference is entirely black.
pub fn ncd(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let num = per_pixel_sum(a, b, |pa, pb| {
        let la = rgb_to_lab(pa);
        let lb = rgb_to_lab(pb);
        lab_norm([la[0] - lb[0], la[1] - lb[1], la[2] - lb[2]])
    });
    let den = per_pixel_sum(a, a, |pa, _| lab_norm(rgb_to_lab(pa)));
    if den == 0.0 {
        return Err(MetricsError::BlackReference);
    }
    Ok(num / den)
}

/// All three metrics of one restoration, plus how long the filter took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub mae: f64,
    pub mse: f64,
    pub ncd: f64,
    pub elapsed: Duration,
}

impl QualityReport {
    /// Evaluates `restored` against the `reference` original.
    pub fn measure(
        reference: &RgbImage,
        restored: &RgbImage,
        elapsed: Duration,
    ) -> Result<Self, MetricsError> {
        Ok(Self {
            mae: mae(reference, restored)?,
            mse: mse(reference, restored)?,
            ncd: ncd(reference, restored)?,
            elapsed,
        })
    }
}

/// Formats with six significant digits, switching to scientific notation
/// outside [1e-4, 1e6).
fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let dec = (5 - mag).max(0) as usize;
        format!("{x:.dec$}")
    } else {
        format!("{x:.5e}")
    }
}

impl fmt::Display for QualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mae={} mse={} ncd={} time={}",
            sig6(self.mae),
            sig6(self.mse),
            sig6(self.ncd),
            sig6(self.elapsed.as_secs_f64())
        )
    }
}
