//! Reading and writing portable pixmaps (P3 ASCII and P6 binary, maxval 255).
//!
//! The reader accepts `#` comments anywhere whitespace is allowed in the
//! header; the writer never emits them. Save-then-load is bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::RgbImage;

#[derive(Debug, Error)]
pub enum PpmError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic number: expected \"P3\" or \"P6\", got {0:?}")]
    BadMagic(String),
    #[error("malformed header field: {0}")]
    BadHeader(String),
    #[error("unsupported maxval {0} (only 255 is supported)")]
    BadMaxval(u32),
    #[error("image dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("pixel data ended early: expected {expected} bytes, got {got}")]
    TruncatedData { expected: usize, got: usize },
    #[error("sample value {0} exceeds maxval 255")]
    SampleRange(u32),
    #[error("trailing junk after pixel data")]
    TrailingData,
}

/// Pulls the next whitespace-delimited token, skipping `#` comments that run
/// to end of line.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<Vec<u8>> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    Some(bytes[start..*pos].to_vec())
}

fn parse_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<u32, PpmError> {
    let tok = next_token(bytes, pos)
        .ok_or_else(|| PpmError::BadHeader(format!("missing {what}")))?;
    let s = std::str::from_utf8(&tok)
        .map_err(|_| PpmError::BadHeader(format!("non-ascii {what}")))?;
    s.parse::<u32>()
        .map_err(|_| PpmError::BadHeader(format!("invalid {what}: {s:?}")))
}

/// Loads a P3 or P6 image with maxval 255.
pub fn load_ppm(path: &Path) -> Result<RgbImage, PpmError> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    parse_ppm(&bytes)
}

/// Parses PPM bytes (P3 or P6, maxval 255).
pub fn parse_ppm(bytes: &[u8]) -> Result<RgbImage, PpmError> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos)
        .ok_or_else(|| PpmError::BadMagic(String::new()))?;
    let binary = match magic.as_slice() {
        b"P3" => false,
        b"P6" => true,
        other => {
            return Err(PpmError::BadMagic(
                String::from_utf8_lossy(other).into_owned(),
            ))
        }
    };

    let width = parse_number(bytes, &mut pos, "width")? as usize;
    let height = parse_number(bytes, &mut pos, "height")? as usize;
    let maxval = parse_number(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(PpmError::BadMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(PpmError::ZeroDimension { width, height });
    }

    let n_samples = width * height * 3;
    let mut data = Vec::with_capacity(width * height);

    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(PpmError::BadHeader(
                "missing whitespace before binary raster".into(),
            ));
        }
        pos += 1;
        let raster = &bytes[pos..];
        if raster.len() < n_samples {
            return Err(PpmError::TruncatedData {
                expected: n_samples,
                got: raster.len(),
            });
        }
        if raster.len() > n_samples {
            return Err(PpmError::TrailingData);
        }
        for px in raster.chunks_exact(3) {
            data.push([px[0], px[1], px[2]]);
        }
    } else {
        let mut triple = [0u8; 3];
        for i in 0..n_samples {
            let got = i * bytes.len() / n_samples.max(1); // only for error reporting
            let v = match next_token(bytes, &mut pos) {
                Some(tok) => {
                    let s = std::str::from_utf8(&tok)
                        .map_err(|_| PpmError::BadHeader("non-ascii sample".into()))?;
                    s.parse::<u32>()
                        .map_err(|_| PpmError::BadHeader(format!("invalid sample: {s:?}")))?
                }
                None => {
                    return Err(PpmError::TruncatedData {
                        expected: n_samples,
                        got,
                    })
                }
            };
            if v > 255 {
                return Err(PpmError::SampleRange(v));
            }
            triple[i % 3] = v as u8;
            if i % 3 == 2 {
                data.push(triple);
            }
        }
        if next_token(bytes, &mut pos).is_some() {
            return Err(PpmError::TrailingData);
        }
    }

    Ok(RgbImage::from_pixels(width, height, data).expect("sized by construction"))
}

/// PPM flavor selector for `save_ppm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PpmFormat {
    /// Binary raster (`P6`).
    #[default]
    Binary,
    /// ASCII samples (`P3`), one pixel per line.
    Ascii,
}

/// Writes `img` to `path`. The header is `<magic>\n<width> <height>\n255\n`
/// with no comments.
pub fn save_ppm(img: &RgbImage, path: &Path, format: PpmFormat) -> Result<(), PpmError> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        PpmFormat::Binary => {
            write!(w, "P6\n{} {}\n255\n", img.width(), img.height())?;
            let mut raster = Vec::with_capacity(img.pixels().len() * 3);
            for px in img.pixels() {
                raster.extend_from_slice(px);
            }
            w.write_all(&raster)?;
        }
        PpmFormat::Ascii => {
            write!(w, "P3\n{} {}\n255\n", img.width(), img.height())?;
            for px in img.pixels() {
                writeln!(w, "{} {} {}", px[0], px[1], px[2])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
