//! RGB rasters, preprocessing, attacks and PSNR.

mod attack;
mod io;
mod preprocess;

pub use attack::{apply_attack, robustness_suite, SuiteEntry, TransformSpec};
pub use io::{read_image, read_png, read_ppm, write_ppm};
pub use preprocess::{preprocess, preprocess_fused, resize_bilinear, WORK_SIZE};

use crate::error::{invalid, Result};

pub const CHANNELS: usize = 3;

/// Sample storage: 8-bit, or normalized reals in [−1, 1].
#[derive(Clone, Debug, PartialEq)]
pub enum Samples {
    U8(Vec<u8>),
    Normalized(Vec<f64>),
}

/// Row-major interleaved RGB image.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    data: Samples,
}

impl ImageBuffer {
    pub fn from_u8(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data: Samples::U8(data) })
    }

    pub fn from_normalized(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(v) = data.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return invalid(format!("normalized sample {v} outside [-1, 1]"));
        }
        Ok(Self { width, height, data: Samples::Normalized(data) })
    }

    /// Uniform gray image.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self { width, height, data: Samples::U8(vec![value; width * height * CHANNELS]) }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &Samples {
        &self.data
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self.data, Samples::Normalized(_))
    }

    pub fn as_u8(&self) -> Option<&[u8]> {
        match &self.data {
            Samples::U8(v) => Some(v),
            Samples::Normalized(_) => None,
        }
    }

    pub fn as_normalized(&self) -> Option<&[f64]> {
        match &self.data {
            Samples::Normalized(v) => Some(v),
            Samples::U8(_) => None,
        }
    }

    /// 8-bit form; normalized samples map back by round((v + 1)·127.5).
    pub fn to_u8(&self) -> ImageBuffer {
        match &self.data {
            Samples::U8(_) => self.clone(),
            Samples::Normalized(v) => Self {
                width: self.width,
                height: self.height,
                data: Samples::U8(v.iter().map(|&x| denormalize(x)).collect()),
            },
        }
    }

    /// Normalized form via v/127.5 − 1.
    pub fn to_normalized(&self) -> ImageBuffer {
        match &self.data {
            Samples::Normalized(_) => self.clone(),
            Samples::U8(v) => Self {
                width: self.width,
                height: self.height,
                data: Samples::Normalized(v.iter().map(|&x| normalize(x)).collect()),
            },
        }
    }

    /// Consumes the buffer and returns its normalized samples.
    pub fn into_normalized(self) -> Vec<f64> {
        match self.data {
            Samples::Normalized(v) => v,
            Samples::U8(v) => v.into_iter().map(normalize).collect(),
        }
    }

    pub fn into_u8(self) -> Vec<u8> {
        match self.data {
            Samples::U8(v) => v,
            Samples::Normalized(v) => v.into_iter().map(denormalize).collect(),
        }
    }

    /// Sub-image copy; the region must lie inside the image.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<ImageBuffer> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return invalid(format!(
                "crop {w}x{h}@({x},{y}) outside {}x{}",
                self.width, self.height
            ));
        }
        fn rows<T: Copy>(src: &[T], sw: usize, x: usize, y: usize, w: usize, h: usize) -> Vec<T> {
            let mut out = Vec::with_capacity(w * h * CHANNELS);
            for r in y..y + h {
                let start = (r * sw + x) * CHANNELS;
                out.extend_from_slice(&src[start..start + w * CHANNELS]);
            }
            out
        }
        let data = match &self.data {
            Samples::U8(v) => Samples::U8(rows(v, self.width, x, y, w, h)),
            Samples::Normalized(v) => Samples::Normalized(rows(v, self.width, x, y, w, h)),
        };
        Ok(Self { width: w, height: h, data })
    }

    pub(crate) fn index(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * CHANNELS + c
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return invalid(format!("empty image {width}x{height}"));
    }
    if width.checked_mul(height).and_then(|p| p.checked_mul(CHANNELS)) != Some(len) {
        return invalid(format!("{len} samples for a {width}x{height}x3 image"));
    }
    Ok(())
}

pub fn normalize(v: u8) -> f64 {
    v as f64 / 127.5 - 1.0
}

pub fn denormalize(v: f64) -> u8 {
    ((v + 1.0) * 127.5).round().clamp(0.0, 255.0) as u8
}

/// Peak signal-to-noise ratio in dB on the 8-bit forms; `f64::INFINITY`
/// for identical images.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return invalid(format!(
            "psnr of {}x{} against {}x{}",
            a.width, a.height, b.width, b.height
        ));
    }
    let (a, b) = (a.to_u8(), b.to_u8());
    let (a, b) = (a.as_u8().unwrap(), b.as_u8().unwrap());
    let sse: u64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    if sse == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse as f64 / a.len() as f64;
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}
