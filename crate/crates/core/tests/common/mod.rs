//! Shared helpers for the integration suites.

pub mod naive;

use vecfilt_core::imagecore::{Pixel, RgbImage};

/// Small xorshift generator so fixtures never depend on the crate's own RNG
/// plumbing.
pub struct XorShift(u64);

impl XorShift {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    pub fn next_byte(&mut self) -> u8 {
        (self.next_u64() >> 24) as u8
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_pixel(&mut self) -> Pixel {
        [self.next_byte(), self.next_byte(), self.next_byte()]
    }
}

/// A piecewise-smooth test image: per-channel linear ramps with a handful
/// of solid rectangles, the kind of structure natural photographs have and
/// white noise does not.
pub fn smooth_image(width: usize, height: usize, seed: u64) -> RgbImage {
    let mut rng = XorShift::new(seed);

    let mut base = [0.0f64; 3];
    let mut gx = [0.0f64; 3];
    let mut gy = [0.0f64; 3];
    for ch in 0..3 {
        base[ch] = 40.0 + 160.0 * rng.next_f64();
        gx[ch] = 1.4 * rng.next_f64() - 0.7;
        gy[ch] = 1.4 * rng.next_f64() - 0.7;
    }

    let mut img = RgbImage::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let mut px = [0u8; 3];
            for ch in 0..3 {
                let v = base[ch] + gx[ch] * x as f64 + gy[ch] * y as f64;
                px[ch] = v.round().clamp(0.0, 255.0) as u8;
            }
            img.set_pixel(x, y, px);
        }
    }

    for _ in 0..6 {
        let x0 = (rng.next_u64() as usize) % width;
        let y0 = (rng.next_u64() as usize) % height;
        let w = 4 + (rng.next_u64() as usize) % (width / 4);
        let h = 4 + (rng.next_u64() as usize) % (height / 4);
        let color = rng.next_pixel();
        for y in y0..(y0 + h).min(height) {
            for x in x0..(x0 + w).min(width) {
                img.set_pixel(x, y, color);
            }
        }
    }
    img
}
