//! Center-crop, resize and normalize to the 256×256 working size.
//!
//! Images whose short side is at least 256 are cropped to their central
//! 256×256 window. Smaller images are first upscaled so the short side is
//! 256 and then center-cropped. Resampling is bilinear with half-pixel
//! centers, evaluated in exact integer arithmetic with round-half-up for
//! 8-bit data.

use super::{normalize, ImageBuffer, Samples, CHANNELS};
use crate::error::{invalid, Result};

pub const WORK_SIZE: usize = 256;

struct Geometry {
    /// Size of the intermediate (possibly upscaled) image.
    sw: usize,
    sh: usize,
    ox: usize,
    oy: usize,
    resample: bool,
}

fn geometry(w: usize, h: usize) -> Geometry {
    let s = w.min(h);
    if s >= WORK_SIZE {
        return Geometry { sw: w, sh: h, ox: (w - WORK_SIZE) / 2, oy: (h - WORK_SIZE) / 2, resample: false };
    }
    let sw = (w * WORK_SIZE + s / 2) / s;
    let sh = (h * WORK_SIZE + s / 2) / s;
    Geometry { sw, sh, ox: (sw - WORK_SIZE) / 2, oy: (sh - WORK_SIZE) / 2, resample: true }
}

/// Source taps and weight numerator along one axis; the weight denominator
/// is `2·dst`.
#[inline]
fn taps(i: usize, src: usize, dst: usize) -> (usize, usize, u64) {
    let num = ((2 * i + 1) * src) as i64 - dst as i64;
    let num = num.max(0) as u64;
    let den = 2 * dst as u64;
    let i0 = ((num / den) as usize).min(src - 1);
    let i1 = (i0 + 1).min(src - 1);
    (i0, i1, num % den)
}

#[inline]
fn sample_u8(src: &[u8], w: usize, h: usize, dw: usize, dh: usize, x: usize, y: usize, c: usize) -> u8 {
    let (x0, x1, fx) = taps(x, w, dw);
    let (y0, y1, fy) = taps(y, h, dh);
    let (dx, dy) = (2 * dw as u64, 2 * dh as u64);
    let p = |xx: usize, yy: usize| src[(yy * w + xx) * CHANNELS + c] as u64;
    let acc = (dx - fx) * (dy - fy) * p(x0, y0)
        + fx * (dy - fy) * p(x1, y0)
        + (dx - fx) * fy * p(x0, y1)
        + fx * fy * p(x1, y1);
    let d = dx * dy;
    ((acc + d / 2) / d) as u8
}

#[inline]
fn sample_f64(src: &[f64], w: usize, h: usize, dw: usize, dh: usize, x: usize, y: usize, c: usize) -> f64 {
    let (x0, x1, fx) = taps(x, w, dw);
    let (y0, y1, fy) = taps(y, h, dh);
    let (dx, dy) = (2 * dw as u64, 2 * dh as u64);
    let p = |xx: usize, yy: usize| src[(yy * w + xx) * CHANNELS + c];
    let acc = ((dx - fx) * (dy - fy)) as f64 * p(x0, y0)
        + (fx * (dy - fy)) as f64 * p(x1, y0)
        + ((dx - fx) * fy) as f64 * p(x0, y1)
        + (fx * fy) as f64 * p(x1, y1);
    acc / (dx * dy) as f64
}

/// Bilinear resize to `dw`×`dh`, keeping the sample representation.
pub fn resize_bilinear(img: &ImageBuffer, dw: usize, dh: usize) -> Result<ImageBuffer> {
    if dw == 0 || dh == 0 {
        return invalid(format!("resize to {dw}x{dh}"));
    }
    let (w, h) = (img.width(), img.height());
    match img.samples() {
        Samples::U8(src) => {
            let mut out = Vec::with_capacity(dw * dh * CHANNELS);
            for y in 0..dh {
                for x in 0..dw {
                    for c in 0..CHANNELS {
                        out.push(sample_u8(src, w, h, dw, dh, x, y, c));
                    }
                }
            }
            ImageBuffer::from_u8(dw, dh, out)
        }
        Samples::Normalized(src) => {
            let mut out = Vec::with_capacity(dw * dh * CHANNELS);
            for y in 0..dh {
                for x in 0..dw {
                    for c in 0..CHANNELS {
                        out.push(sample_f64(src, w, h, dw, dh, x, y, c));
                    }
                }
            }
            ImageBuffer::from_normalized(dw, dh, out)
        }
    }
}

/// Staged path: resize (when needed), crop, normalize.
pub fn preprocess(img: &ImageBuffer) -> ImageBuffer {
    let g = geometry(img.width(), img.height());
    let scaled;
    let base = if g.resample {
        scaled = resize_bilinear(img, g.sw, g.sh).expect("nonzero size");
        &scaled
    } else {
        img
    };
    base.crop(g.ox, g.oy, WORK_SIZE, WORK_SIZE)
        .expect("window inside image")
        .to_normalized()
}

/// Single pass over the output with composed crop/resize indices and the
/// normalization applied per sample. Equal to [`preprocess`].
pub fn preprocess_fused(img: &ImageBuffer) -> ImageBuffer {
    let (w, h) = (img.width(), img.height());
    let g = geometry(w, h);
    let mut out = Vec::with_capacity(WORK_SIZE * WORK_SIZE * CHANNELS);
    match img.samples() {
        Samples::U8(src) => {
            for y in 0..WORK_SIZE {
                for x in 0..WORK_SIZE {
                    let (sx, sy) = (x + g.ox, y + g.oy);
                    for c in 0..CHANNELS {
                        let v = if g.resample {
                            sample_u8(src, w, h, g.sw, g.sh, sx, sy, c)
                        } else {
                            src[(sy * w + sx) * CHANNELS + c]
                        };
                        out.push(normalize(v));
                    }
                }
            }
        }
        Samples::Normalized(src) => {
            for y in 0..WORK_SIZE {
                for x in 0..WORK_SIZE {
                    let (sx, sy) = (x + g.ox, y + g.oy);
                    for c in 0..CHANNELS {
                        out.push(if g.resample {
                            sample_f64(src, w, h, g.sw, g.sh, sx, sy, c)
                        } else {
                            src[(sy * w + sx) * CHANNELS + c]
                        });
                    }
                }
            }
        }
    }
    ImageBuffer::from_normalized(WORK_SIZE, WORK_SIZE, out).expect("values in range")
}
