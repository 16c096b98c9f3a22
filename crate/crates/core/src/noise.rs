//! Seeded synthetic corruption: impulsive (uncorrelated and correlated
//! channel patterns) and mixed Gaussian-plus-impulsive noise.
//!
//! Outputs are reproducible across platforms: a single ChaCha8 stream is
//! consumed in raster order with a fixed per-pixel word budget, so a given
//! `(image, spec)` pair always yields the same bytes. The budget also makes
//! the mixed model with `sigma = 0` bit-identical to the correlated model
//! (the Gaussian pass is skipped entirely and draws nothing).
//!
//! Per-pixel stream layout:
//! - uncorrelated: per channel k = 0,1,2 — one uniform (u64) deciding
//!   corruption, then one impulse word (u32), drawn whether used or not;
//! - correlated: one uniform (u64) deciding corruption, one uniform (u64)
//!   picking the pattern, then three impulse words (u32);
//! - mixed, `sigma > 0`: a full-image Gaussian pass first (four u64 per
//!   pixel: two Box-Muller pairs, fourth variate discarded), then the
//!   correlated layout.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::imagecore::RgbImage;

/// Which corruption process to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// Each channel of each pixel is independently replaced with
    /// probability `phi_k[k]`.
    UncorrelatedImpulsive,
    /// With probability `phi` a pixel is corrupted; the corruption hits
    /// channel 1, 2, or 3 alone (conditional probabilities `phi_k`) or all
    /// three (the remaining probability).
    CorrelatedImpulsive,
    /// Additive Gaussian noise per channel, then the correlated model.
    Mixed,
}

/// Distribution of replacement values for corrupted channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImpulseKind {
    /// Uniform over {0, ..., 255}.
    #[default]
    Uniform,
    /// Either extreme, 0 or 255, with equal probability.
    SaltPepper,
}

/// A complete noise configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    /// Overall sample corruption probability (correlated/mixed models).
    pub phi: f64,
    /// Per-channel probabilities: absolute in the uncorrelated model,
    /// conditional pattern weights in the correlated one.
    pub phi_k: [f64; 3],
    /// Gaussian sigma in channel units (mixed model only).
    pub gaussian_sigma: f64,
    pub impulse: ImpulseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(model: NoiseModel, phi: f64, seed: u64) -> Self {
        Self {
            model,
            phi,
            phi_k: [0.25, 0.25, 0.25],
            gaussian_sigma: 10.0,
            impulse: ImpulseKind::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(0.0..=1.0).contains(&self.phi) {
            return Err(NoiseError::BadPhi(self.phi));
        }
        let sum: f64 = self.phi_k.iter().sum();
        if self.phi_k.iter().any(|p| !(0.0..=1.0).contains(p)) || sum > 1.0 + 1e-12 {
            return Err(NoiseError::BadPhiK(self.phi_k));
        }
        if !(self.gaussian_sigma.is_finite() && self.gaussian_sigma >= 0.0) {
            return Err(NoiseError::BadSigma(self.gaussian_sigma));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("phi must be in [0, 1], got {0}")]
    BadPhi(f64),
    #[error("each phi_k must be in [0, 1] with sum <= 1, got {0:?}")]
    BadPhiK([f64; 3]),
    #[error("gaussian sigma must be finite and nonnegative, got {0}")]
    BadSigma(f64),
}

/// Uniform double in [0, 1) from the top 53 bits of one u64 word.
#[inline]
fn next_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One impulse value from one u32 word (top bits, unbiased).
#[inline]
fn next_impulse(rng: &mut ChaCha8Rng, kind: ImpulseKind) -> u8 {
    let word = rng.next_u32();
    match kind {
        ImpulseKind::Uniform => (word >> 24) as u8,
        ImpulseKind::SaltPepper => {
            if word >> 31 == 0 {
                0
            } else {
                255
            }
        }
    }
}

/// Two standard normal variates from two uniform words (Box-Muller).
#[inline]
fn next_gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // map the first uniform into (0, 1] so the logarithm is finite
    let u1 = 1.0 - next_uniform(rng);
    let u2 = next_uniform(rng);
    let radius = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (radius * theta.cos(), radius * theta.sin())
}

fn uncorrelated_pass(out: &mut RgbImage, spec: &NoiseSpec, rng: &mut ChaCha8Rng) {
    for px in out.pixels_mut() {
        for k in 0..3 {
            let u = next_uniform(rng);
            let r = next_impulse(rng, spec.impulse);
            if u < spec.phi_k[k] {
                px[k] = r;
            }
        }
    }
}

fn correlated_pass(out: &mut RgbImage, spec: &NoiseSpec, rng: &mut ChaCha8Rng) {
    let [p1, p2, p3] = spec.phi_k;
    for px in out.pixels_mut() {
        let u = next_uniform(rng);
        let pattern = next_uniform(rng);
        let r = [
            next_impulse(rng, spec.impulse),
            next_impulse(rng, spec.impulse),
            next_impulse(rng, spec.impulse),
        ];
        if u >= spec.phi {
            continue;
        }
        if pattern < p1 {
            px[0] = r[0];
        } else if pattern < p1 + p2 {
            px[1] = r[1];
        } else if pattern < p1 + p2 + p3 {
            px[2] = r[2];
        } else {
            *px = r;
        }
    }
}

fn gaussian_pass(out: &mut RgbImage, sigma: f64, rng: &mut ChaCha8Rng) {
    for px in out.pixels_mut() {
        let (g0, g1) = next_gaussian_pair(rng);
        let (g2, _) = next_gaussian_pair(rng);
        for (ch, g) in [g0, g1, g2].into_iter().enumerate() {
            let v = px[ch] as f64 + sigma * g;
            px[ch] = v.round().clamp(0.0, 255.0) as u8;
        }
    }
}

/// Applies the configured noise process to a copy of `img`.
///
/// Single-threaded by contract: the sequential RNG stream defines the
/// output. Identical `(img, spec)` always produce identical results.
pub fn corrupt(img: &RgbImage, spec: &NoiseSpec) -> Result<RgbImage, NoiseError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = img.clone();
    match spec.model {
        NoiseModel::UncorrelatedImpulsive => uncorrelated_pass(&mut out, spec, &mut rng),
        NoiseModel::CorrelatedImpulsive => correlated_pass(&mut out, spec, &mut rng),
        NoiseModel::Mixed => {
            if spec.gaussian_sigma > 0.0 {
                gaussian_pass(&mut out, spec.gaussian_sigma, &mut rng);
            }
            correlated_pass(&mut out, spec, &mut rng);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::Pixel;

    fn test_image(width: usize, height: usize) -> RgbImage {
        let pixels: Vec<Pixel> = (0..width * height)
            .map(|i| {
                [
                    (i * 7 % 256) as u8,
                    (i * 13 % 256) as u8,
                    (i * 31 % 256) as u8,
                ]
            })
            .collect();
        RgbImage::from_pixels(width, height, pixels).unwrap()
    }

    #[test]
    fn phi_zero_is_identity() {
        let img = test_image(32, 32);
        for model in [
            NoiseModel::UncorrelatedImpulsive,
            NoiseModel::CorrelatedImpulsive,
            NoiseModel::Mixed,
        ] {
            let mut spec = NoiseSpec::new(model, 0.0, 99);
            spec.phi_k = [0.0, 0.0, 0.0];
            spec.gaussian_sigma = 0.0;
            let out = corrupt(&img, &spec).unwrap();
            assert_eq!(out, img, "{model:?}");
        }
    }

    #[test]
    fn residual_pattern_replaces_all_channels() {
        // phi = 1 with zero per-channel weights leaves only the
        // all-three-channels pattern; salt-and-pepper impulses on a
        // mid-gray image make every replacement visible
        let img = RgbImage::from_pixels(16, 16, vec![[128, 128, 128]; 256]).unwrap();
        let mut spec = NoiseSpec::new(NoiseModel::CorrelatedImpulsive, 1.0, 7);
        spec.phi_k = [0.0, 0.0, 0.0];
        spec.impulse = ImpulseKind::SaltPepper;
        let out = corrupt(&img, &spec).unwrap();
        for px in out.pixels() {
            for ch in 0..3 {
                assert!(px[ch] == 0 || px[ch] == 255, "channel kept {}", px[ch]);
            }
        }
    }

    #[test]
    fn determinism_and_seed_sensitivity() {
        let img = test_image(24, 24);
        let spec = NoiseSpec::new(NoiseModel::Mixed, 0.3, 1234);
        let a = corrupt(&img, &spec).unwrap();
        let b = corrupt(&img, &spec).unwrap();
        assert_eq!(a, b);
        let other = NoiseSpec { seed: 1235, ..spec };
        assert_ne!(corrupt(&img, &other).unwrap(), a);
    }

    #[test]
    fn mixed_with_zero_sigma_equals_correlated() {
        let img = test_image(48, 32);
        for seed in [0u64, 1, 42, u64::MAX] {
            let mut mixed = NoiseSpec::new(NoiseModel::Mixed, 0.2, seed);
            mixed.gaussian_sigma = 0.0;
            let correlated = NoiseSpec {
                model: NoiseModel::CorrelatedImpulsive,
                ..mixed
            };
            assert_eq!(
                corrupt(&img, &mixed).unwrap(),
                corrupt(&img, &correlated).unwrap(),
                "seed {seed}"
            );
        }
    }

    /// Probability that a pixel visibly changes under the correlated model:
    /// a uniform impulse reproduces the original value with chance 1/256.
    fn correlated_alter_prob(phi: f64, phi_k: [f64; 3]) -> f64 {
        let single_keep = 1.0f64 / 256.0;
        let all_keep = single_keep.powi(3);
        let residual = 1.0 - phi_k.iter().sum::<f64>();
        let keep = phi_k.iter().sum::<f64>() * single_keep + residual * all_keep;
        phi * (1.0 - keep)
    }

    #[test]
    fn correlated_alteration_rate_tracks_phi() {
        let img = test_image(512, 512);
        let n = (512 * 512) as f64;
        for (i, phi) in [0.1, 0.2, 0.3, 0.4].into_iter().enumerate() {
            let spec = NoiseSpec::new(NoiseModel::CorrelatedImpulsive, phi, 1000 + i as u64);
            let out = corrupt(&img, &spec).unwrap();
            let altered = out
                .pixels()
                .iter()
                .zip(img.pixels())
                .filter(|(a, b)| a != b)
                .count() as f64;
            let p = correlated_alter_prob(phi, spec.phi_k);
            let band = 3.0 * (p * (1.0 - p) / n).sqrt();
            assert!(
                (altered / n - p).abs() <= band,
                "phi {phi}: altered fraction {} vs expected {p} (band {band})",
                altered / n
            );
        }
    }

    #[test]
    fn correlated_pattern_frequencies() {
        let img = test_image(512, 512);
        let spec = NoiseSpec::new(NoiseModel::CorrelatedImpulsive, 0.1, 2024);
        let out = corrupt(&img, &spec).unwrap();

        let mut counts = [0usize; 4]; // ch0 only, ch1 only, ch2 only, other
        let mut corrupted = 0usize;
        for (a, b) in out.pixels().iter().zip(img.pixels()) {
            let mask: Vec<usize> = (0..3).filter(|&ch| a[ch] != b[ch]).collect();
            if mask.is_empty() {
                continue;
            }
            corrupted += 1;
            match mask.as_slice() {
                [0] => counts[0] += 1,
                [1] => counts[1] += 1,
                [2] => counts[2] += 1,
                _ => counts[3] += 1,
            }
        }

        let frac = corrupted as f64 / (512.0 * 512.0);
        assert!((frac - 0.1).abs() <= 0.005, "corrupted fraction {frac}");
        for (k, &c) in counts.iter().take(3).enumerate() {
            let f = c as f64 / corrupted as f64;
            assert!(
                (f - 0.25).abs() <= 0.01,
                "single-channel pattern {k} frequency {f}"
            );
        }
    }

    #[test]
    fn uncorrelated_alteration_rate() {
        let img = test_image(256, 256);
        let spec = NoiseSpec::new(NoiseModel::UncorrelatedImpulsive, 0.0, 555);
        let out = corrupt(&img, &spec).unwrap();
        // per channel: altered with probability phi_k * 255/256
        let p_ch = 0.25 * (255.0 / 256.0);
        let p = 1.0 - (1.0f64 - p_ch).powi(3);
        let n = (256 * 256) as f64;
        let altered = out
            .pixels()
            .iter()
            .zip(img.pixels())
            .filter(|(a, b)| a != b)
            .count() as f64;
        let band = 3.0 * (p * (1.0 - p) / n).sqrt();
        assert!(
            (altered / n - p).abs() <= band,
            "altered fraction {} vs expected {p}",
            altered / n
        );
    }

    #[test]
    fn salt_pepper_impulses_hit_extremes_only() {
        let img = RgbImage::from_pixels(64, 64, vec![[100, 150, 200]; 4096]).unwrap();
        let mut spec = NoiseSpec::new(NoiseModel::UncorrelatedImpulsive, 0.0, 9);
        spec.impulse = ImpulseKind::SaltPepper;
        let out = corrupt(&img, &spec).unwrap();
        let mut replaced = 0usize;
        for (a, b) in out.pixels().iter().zip(img.pixels()) {
            for ch in 0..3 {
                if a[ch] != b[ch] {
                    assert!(a[ch] == 0 || a[ch] == 255);
                    replaced += 1;
                }
            }
        }
        assert!(replaced > 0, "no channel was replaced at phi_k = 0.25");
    }

    #[test]
    fn gaussian_stage_perturbs_most_pixels() {
        let img = RgbImage::from_pixels(64, 64, vec![[128, 128, 128]; 4096]).unwrap();
        let mut spec = NoiseSpec::new(NoiseModel::Mixed, 0.0, 77);
        spec.phi_k = [0.0, 0.0, 0.0];
        spec.gaussian_sigma = 10.0;
        let out = corrupt(&img, &spec).unwrap();
        let changed = out
            .pixels()
            .iter()
            .zip(img.pixels())
            .filter(|(a, b)| a != b)
            .count();
        // P(all three rounded perturbations are 0) = P(|N(0,10)| < 0.5)^3,
        // about 6e-5; on 4096 pixels essentially everything moves
        assert!(changed > 4000, "only {changed}/4096 pixels perturbed");
        // sigma stays moderate: no value should jump implausibly far
        for (a, b) in out.pixels().iter().zip(img.pixels()) {
            for ch in 0..3 {
                assert!((a[ch] as i32 - b[ch] as i32).abs() <= 60);
            }
        }
    }

    #[test]
    fn spec_validation() {
        let bad_phi = NoiseSpec::new(NoiseModel::CorrelatedImpulsive, 1.5, 0);
        assert!(matches!(bad_phi.validate(), Err(NoiseError::BadPhi(_))));

        let mut bad_k = NoiseSpec::new(NoiseModel::CorrelatedImpulsive, 0.5, 0);
        bad_k.phi_k = [0.5, 0.4, 0.3];
        assert!(matches!(bad_k.validate(), Err(NoiseError::BadPhiK(_))));

        let mut bad_sigma = NoiseSpec::new(NoiseModel::Mixed, 0.5, 0);
        bad_sigma.gaussian_sigma = -1.0;
        assert!(matches!(bad_sigma.validate(), Err(NoiseError::BadSigma(_))));

        assert!(NoiseSpec::new(NoiseModel::Mixed, 1.0, 0).validate().is_ok());
    }
}
