//! Image container and the sliding-window engine that drives every filter.
//!
//! Pixels are 8-bit RGB triples stored row major. Filter arithmetic happens
//! in `f64` elsewhere; this module only moves pixels around.

mod ppm;

pub use ppm::{load_ppm, parse_ppm, save_ppm, PpmError, PpmFormat};

use rayon::prelude::*;
use thiserror::Error;

/// One RGB pixel, channel values in `[0, 255]`.
pub type Pixel = [u8; 3];

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("pixel buffer has {got} pixels, expected {expected} for {width}x{height}")]
    BufferSize {
        width: usize,
        height: usize,
        expected: usize,
        got: usize,
    },
    #[error("window side must be odd, got {0}")]
    EvenWindow(usize),
    #[error("window side {side} exceeds image dimensions {width}x{height}")]
    WindowTooLarge {
        side: usize,
        width: usize,
        height: usize,
    },
    #[error("window side must be at least 3, got {0}")]
    WindowTooSmall(usize),
}

/// An RGB image: `height` rows by `width` columns of 8-bit pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<Pixel>,
}

impl RgbImage {
    /// All-black image of the given dimensions.
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![[0, 0, 0]; width * height],
        }
    }

    /// Wraps a row-major pixel buffer. Fails if the buffer length does not
    /// equal `width * height`.
    pub fn from_pixels(width: usize, height: usize, data: Vec<Pixel>) -> Result<Self, ImageError> {
        if data.len() != width * height {
            return Err(ImageError::BufferSize {
                width,
                height,
                expected: width * height,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixel at row `r`, column `c` (0-based).
    #[inline]
    pub fn pixel(&self, r: usize, c: usize) -> Pixel {
        self.data[r * self.width + c]
    }

    #[inline]
    pub fn set_pixel(&mut self, r: usize, c: usize, p: Pixel) {
        self.data[r * self.width + c] = p;
    }

    /// Row-major pixel slice.
    pub fn pixels(&self) -> &[Pixel] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [Pixel] {
        &mut self.data
    }
}

/// The pixels of one filter window, re-indexed raster-wise: sample 0 is the
/// window's top-left corner, sample `n-1` its bottom-right, and the spatial
/// center sits at `center_index() = (n-1)/2`.
///
/// Window positions are commonly written 1-based (x_1 .. x_n with center
/// x_((n+1)/2)); this type is 0-based, so documentation index `i` maps to
/// `sample(i - 1)`.
#[derive(Debug)]
pub struct WindowView<'a> {
    side: usize,
    samples: &'a [Pixel],
}

impl<'a> WindowView<'a> {
    /// Wraps `samples` as a `side`x`side` window. `samples.len()` must equal
    /// `side * side` and `side` must be odd and >= 3.
    pub fn new(side: usize, samples: &'a [Pixel]) -> Result<Self, ImageError> {
        if side % 2 == 0 {
            return Err(ImageError::EvenWindow(side));
        }
        if side < 3 {
            return Err(ImageError::WindowTooSmall(side));
        }
        if samples.len() != side * side {
            return Err(ImageError::BufferSize {
                width: side,
                height: side,
                expected: side * side,
                got: samples.len(),
            });
        }
        Ok(Self { side, samples })
    }

    /// Number of samples `n = side * side`.
    #[inline]
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    /// 0-based index of the spatial center sample.
    #[inline]
    pub fn center_index(&self) -> usize {
        (self.n() - 1) / 2
    }

    /// The pixel at the window's spatial center.
    #[inline]
    pub fn center(&self) -> Pixel {
        self.samples[self.center_index()]
    }

    #[inline]
    pub fn sample(&self, i: usize) -> Pixel {
        self.samples[i]
    }

    #[inline]
    pub fn samples(&self) -> &[Pixel] {
        self.samples
    }
}

/// Border policy for windows that hang over the image edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Border {
    /// Clamp out-of-range coordinates to the nearest edge pixel, so every
    /// output pixel sees a full n-sample window.
    #[default]
    Replicate,
    /// Copy border pixels through unfiltered; only interior pixels (those
    /// with a fully in-bounds window) are filtered.
    Skip,
}

fn validate_window(img: &RgbImage, side: usize) -> Result<(), ImageError> {
    if side % 2 == 0 {
        return Err(ImageError::EvenWindow(side));
    }
    if side < 3 {
        return Err(ImageError::WindowTooSmall(side));
    }
    if side > img.width || side > img.height {
        return Err(ImageError::WindowTooLarge {
            side,
            width: img.width,
            height: img.height,
        });
    }
    Ok(())
}

/// Applies `f` to the window centered on every pixel and collects the results
/// into a new image of the same dimensions. Borders are replicate-padded.
///
/// `f` must be a pure function of the window; rows are evaluated in parallel
/// and the output is bit-identical for any thread count.
pub fn sliding_apply<F>(img: &RgbImage, side: usize, f: F) -> Result<RgbImage, ImageError>
where
    F: Fn(&WindowView) -> Pixel + Sync,
{
    sliding_apply_bordered(img, side, Border::Replicate, f)
}

/// `sliding_apply` with an explicit border policy.
pub fn sliding_apply_bordered<F>(
    img: &RgbImage,
    side: usize,
    border: Border,
    f: F,
) -> Result<RgbImage, ImageError>
where
    F: Fn(&WindowView) -> Pixel + Sync,
{
    validate_window(img, side)?;
    let (width, height) = (img.width, img.height);
    let half = side / 2;
    let n = side * side;

    let mut out = vec![[0u8, 0, 0]; width * height];
    out.par_chunks_mut(width)
        .enumerate()
        .for_each(|(r, out_row)| {
            let mut buf = vec![[0u8, 0, 0]; n];
            for (c, slot) in out_row.iter_mut().enumerate() {
                let interior =
                    r >= half && r + half < height && c >= half && c + half < width;
                if border == Border::Skip && !interior {
                    *slot = img.pixel(r, c);
                    continue;
                }
                fill_window(img, r, c, side, &mut buf);
                let win = WindowView {
                    side,
                    samples: &buf,
                };
                *slot = f(&win);
            }
        });

    RgbImage::from_pixels(width, height, out)
}

/// Gathers the `side`x`side` window centered on (r, c) into `buf` in raster
/// order, clamping coordinates at the image edge.
fn fill_window(img: &RgbImage, r: usize, c: usize, side: usize, buf: &mut [Pixel]) {
    let half = (side / 2) as isize;
    let (w, h) = (img.width as isize, img.height as isize);
    let mut k = 0;
    for dr in -half..=half {
        let rr = (r as isize + dr).clamp(0, h - 1) as usize;
        for dc in -half..=half {
            let cc = (c as isize + dc).clamp(0, w - 1) as usize;
            buf[k] = img.pixel(rr, cc);
            k += 1;
        }
    }
}
