//! Image transforms used for robustness evaluation. All attacks operate on
//! 8-bit data; normalized inputs are quantized first.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{preprocess::resize_bilinear, ImageBuffer, CHANNELS};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "param", rename_all = "snake_case")]
pub enum TransformSpec {
    #[serde(rename = "none")]
    Identity,
    /// Center crop to an n×n window.
    Centercrop(usize),
    /// Bilinear resize to n×n.
    Resizeto(usize),
    Normalize,
    /// Keep the centered fraction x of the area.
    Crop(f64),
    /// Scale by x, then back to the original size.
    Resize(f64),
    Brightness(f64),
    Contrast(f64),
    Saturation(f64),
    Sharpness(f64),
    /// 3×3 Gaussian, σ = 1.
    Blur,
    /// Glyph block with integer scale.
    OverlayText(usize),
    /// Block-DCT quantization at a JPEG-like quality in 1..=100.
    JpegApprox(u8),
}

impl TransformSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| invalid(format!("{what} out of range in {self:?}"));
        match *self {
            TransformSpec::Centercrop(n) | TransformSpec::Resizeto(n) if n == 0 => bad("size"),
            TransformSpec::Crop(x) | TransformSpec::Resize(x) if !(x > 0.0 && x <= 1.0) => bad("fraction"),
            TransformSpec::Brightness(x)
            | TransformSpec::Contrast(x)
            | TransformSpec::Saturation(x)
            | TransformSpec::Sharpness(x)
                if !(x.is_finite() && x >= 0.0) =>
            {
                bad("factor")
            }
            TransformSpec::OverlayText(s) if s == 0 || s > 64 => bad("scale"),
            TransformSpec::JpegApprox(q) if q == 0 || q > 100 => bad("quality"),
            _ => Ok(()),
        }
    }

    /// Short column label, e.g. `C-0.1`, `BR-2`.
    pub fn label(&self) -> String {
        match *self {
            TransformSpec::Identity => "none".into(),
            TransformSpec::Centercrop(n) => format!("CC-{n}"),
            TransformSpec::Resizeto(n) => format!("RT-{n}"),
            TransformSpec::Normalize => "NORM".into(),
            TransformSpec::Crop(x) => format!("C-{x}"),
            TransformSpec::Resize(x) => format!("R-{x}"),
            TransformSpec::Brightness(x) => format!("BR-{x}"),
            TransformSpec::Contrast(x) => format!("CON-{x}"),
            TransformSpec::Saturation(x) => format!("SAT-{x}"),
            TransformSpec::Sharpness(x) => format!("SH-{x}"),
            TransformSpec::Blur => "BL".into(),
            TransformSpec::OverlayText(s) => format!("TXT-{s}"),
            TransformSpec::JpegApprox(q) => format!("JPEG~{q}"),
        }
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// One entry of an attack-suite file: an op with a single `param`, a list
/// of `params` (one transform each), or neither.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<serde_json_number::Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<serde_json_number::Number>>,
}

mod serde_json_number {
    use serde::{Deserialize, Serialize};

    /// Integer or real parameter.
    #[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum Number {
        Int(u64),
        Real(f64),
    }

    impl Number {
        pub fn as_f64(self) -> f64 {
            match self {
                Number::Int(v) => v as f64,
                Number::Real(v) => v,
            }
        }
    }
}

impl SuiteEntry {
    pub fn expand(&self) -> Result<Vec<TransformSpec>> {
        let values: Vec<Option<f64>> = match (&self.param, &self.params) {
            (Some(_), Some(_)) => return invalid(format!("'{}' has both param and params", self.op)),
            (Some(p), None) => vec![Some(p.as_f64())],
            (None, Some(ps)) => ps.iter().map(|p| Some(p.as_f64())).collect(),
            (None, None) => vec![None],
        };
        values.into_iter().map(|v| build(&self.op, v)).collect()
    }
}

fn build(op: &str, param: Option<f64>) -> Result<TransformSpec> {
    let need = |p: Option<f64>| p.ok_or_else(|| Error::InvalidInput(format!("'{op}' needs a param")));
    let int = |p: Option<f64>, default: Option<usize>| -> Result<usize> {
        match (p, default) {
            (None, Some(d)) => Ok(d),
            (None, None) => Err(Error::InvalidInput(format!("'{op}' needs a param"))),
            (Some(v), _) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            (Some(v), _) => Err(Error::InvalidInput(format!("'{op}' needs an integer, got {v}"))),
        }
    };
    let spec = match op {
        "none" | "identity" => TransformSpec::Identity,
        "centercrop" => TransformSpec::Centercrop(int(param, None)?),
        "resizeto" => TransformSpec::Resizeto(int(param, None)?),
        "normalize" => TransformSpec::Normalize,
        "crop" => TransformSpec::Crop(need(param)?),
        "resize" => TransformSpec::Resize(need(param)?),
        "brightness" => TransformSpec::Brightness(need(param)?),
        "contrast" => TransformSpec::Contrast(need(param)?),
        "saturation" => TransformSpec::Saturation(need(param)?),
        "sharpness" => TransformSpec::Sharpness(need(param)?),
        "blur" => TransformSpec::Blur,
        "overlay_text" => TransformSpec::OverlayText(int(param, Some(2))?),
        "jpeg_approx" => TransformSpec::JpegApprox(int(param, Some(50))?.min(255) as u8),
        other => return invalid(format!("unknown attack '{other}'")),
    };
    spec.validate()?;
    Ok(spec)
}

/// Identity plus the six robustness columns: C-0.1, C-0.5, R-0.5, BL,
/// BR-2, CON-2.
pub fn robustness_suite() -> Vec<TransformSpec> {
    vec![
        TransformSpec::Identity,
        TransformSpec::Crop(0.1),
        TransformSpec::Crop(0.5),
        TransformSpec::Resize(0.5),
        TransformSpec::Blur,
        TransformSpec::Brightness(2.0),
        TransformSpec::Contrast(2.0),
    ]
}

/// Applies one transform. `_rng_seed` is accepted for interface stability;
/// every attack here is deterministic.
pub fn apply_attack(img: &ImageBuffer, spec: &TransformSpec, _rng_seed: u64) -> Result<ImageBuffer> {
    spec.validate()?;
    if let TransformSpec::Normalize = spec {
        return Ok(img.to_normalized());
    }
    let img = img.to_u8();
    let (w, h) = (img.width(), img.height());
    let src = img.as_u8().expect("8-bit");
    match *spec {
        TransformSpec::Identity | TransformSpec::Normalize => Ok(img),
        TransformSpec::Centercrop(n) => {
            if n > w.min(h) {
                return invalid(format!("centercrop {n} on {w}x{h}"));
            }
            img.crop((w - n) / 2, (h - n) / 2, n, n)
        }
        TransformSpec::Resizeto(n) => resize_bilinear(&img, n, n),
        TransformSpec::Crop(x) => {
            let side = x.sqrt();
            let cw = ((w as f64 * side).round() as usize).clamp(1, w);
            let ch = ((h as f64 * side).round() as usize).clamp(1, h);
            img.crop((w - cw) / 2, (h - ch) / 2, cw, ch)
        }
        TransformSpec::Resize(x) => {
            if x == 1.0 {
                return Ok(img);
            }
            let dw = ((w as f64 * x).round() as usize).max(1);
            let dh = ((h as f64 * x).round() as usize).max(1);
            let small = resize_bilinear(&img, dw, dh)?;
            resize_bilinear(&small, w, h)
        }
        TransformSpec::Brightness(x) => Ok(map_samples(&img, |_, v| v * x)),
        TransformSpec::Contrast(x) => {
            let mean = luma(src).iter().sum::<f64>() / (w * h) as f64;
            Ok(map_samples(&img, |_, v| mean + x * (v - mean)))
        }
        TransformSpec::Saturation(x) => {
            let gray = luma(src);
            Ok(map_samples(&img, |i, v| {
                let g = gray[i / CHANNELS];
                g + x * (v - g)
            }))
        }
        TransformSpec::Sharpness(x) => {
            const SMOOTH: [[f64; 3]; 3] = [[1.0, 1.0, 1.0], [1.0, 5.0, 1.0], [1.0, 1.0, 1.0]];
            let smooth = convolve3(&img, &SMOOTH, 13.0);
            Ok(map_samples(&img, |i, v| smooth[i] + x * (v - smooth[i])))
        }
        TransformSpec::Blur => {
            let g1 = (-0.5f64).exp();
            let g2 = (-1.0f64).exp();
            let k = [[g2, g1, g2], [g1, 1.0, g1], [g2, g1, g2]];
            let sum: f64 = k.iter().flatten().sum();
            let out = convolve3(&img, &k, sum);
            Ok(from_reals(w, h, &out))
        }
        TransformSpec::OverlayText(scale) => Ok(overlay_text(&img, scale)),
        TransformSpec::JpegApprox(q) => Ok(jpeg_approx(&img, q)),
    }
}

fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn from_reals(w: usize, h: usize, v: &[f64]) -> ImageBuffer {
    ImageBuffer::from_u8(w, h, v.iter().map(|&x| quantize(x)).collect()).expect("same size")
}

fn map_samples(img: &ImageBuffer, f: impl Fn(usize, f64) -> f64) -> ImageBuffer {
    let src = img.as_u8().expect("8-bit");
    let data = src.iter().enumerate().map(|(i, &v)| quantize(f(i, v as f64))).collect();
    ImageBuffer::from_u8(img.width(), img.height(), data).expect("same size")
}

fn luma(src: &[u8]) -> Vec<f64> {
    src.chunks_exact(CHANNELS)
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect()
}

/// Per-channel 3×3 convolution with clamped borders, divided by `norm`.
fn convolve3(img: &ImageBuffer, k: &[[f64; 3]; 3], norm: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let src = img.as_u8().expect("8-bit");
    let mut out = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..CHANNELS {
                let mut acc = 0.0;
                for (dy, row) in k.iter().enumerate() {
                    let yy = (y + dy).saturating_sub(1).min(h - 1);
                    for (dx, &kv) in row.iter().enumerate() {
                        let xx = (x + dx).saturating_sub(1).min(w - 1);
                        acc += kv * src[(yy * w + xx) * CHANNELS + c] as f64;
                    }
                }
                out[(y * w + x) * CHANNELS + c] = acc / norm;
            }
        }
    }
    out
}

/// 5×7 bitmaps for the stamped text "WM".
const GLYPHS: [[u8; 7]; 2] = [
    [0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b11011, 0b10001],
    [0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001],
];

fn overlay_text(img: &ImageBuffer, scale: usize) -> ImageBuffer {
    let (w, h) = (img.width(), img.height());
    let mut data = img.as_u8().expect("8-bit").to_vec();
    let (x0, y0) = (w / 16, h / 16);
    for (g, glyph) in GLYPHS.iter().enumerate() {
        for (r, bits) in glyph.iter().enumerate() {
            for col in 0..5 {
                if bits & (1 << (4 - col)) == 0 {
                    continue;
                }
                for sy in 0..scale {
                    for sx in 0..scale {
                        let x = x0 + (g * 6 + col) * scale + sx;
                        let y = y0 + r * scale + sy;
                        if x < w && y < h {
                            let i = img.index(x, y, 0);
                            data[i..i + CHANNELS].fill(255);
                        }
                    }
                }
            }
        }
    }
    ImageBuffer::from_u8(w, h, data).expect("same size")
}

const JPEG_LUMA: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, 12, 12, 14, 19, 26, 58, 60, 55, 14, 13, 16, 24, 40, 57, 69, 56, 14, 17, 22, 29,
    51, 87, 80, 62, 18, 22, 37, 56, 68, 109, 103, 77, 24, 35, 55, 64, 81, 104, 113, 92, 49, 64, 78, 87, 103, 121,
    120, 101, 72, 92, 95, 98, 112, 100, 103, 99,
];

fn jpeg_approx(img: &ImageBuffer, quality: u8) -> ImageBuffer {
    let (w, h) = (img.width(), img.height());
    let src = img.as_u8().expect("8-bit");
    let q = quality as u32;
    let s = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let table: Vec<f64> = JPEG_LUMA
        .iter()
        .map(|&t| ((t as u32 * s + 50) / 100).max(1) as f64)
        .collect();
    let mut basis = [[0.0f64; 8]; 8];
    for (u, row) in basis.iter_mut().enumerate() {
        let cu = if u == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
        for (x, v) in row.iter_mut().enumerate() {
            *v = cu * ((2 * x + 1) as f64 * u as f64 * PI / 16.0).cos();
        }
    }
    let mut out = vec![0u8; src.len()];
    let mut block = [[0.0f64; 8]; 8];
    let mut coef = [[0.0f64; 8]; 8];
    for by in (0..h).step_by(8) {
        for bx in (0..w).step_by(8) {
            for c in 0..CHANNELS {
                for (y, row) in block.iter_mut().enumerate() {
                    for (x, v) in row.iter_mut().enumerate() {
                        let (xx, yy) = ((bx + x).min(w - 1), (by + y).min(h - 1));
                        *v = src[(yy * w + xx) * CHANNELS + c] as f64 - 128.0;
                    }
                }
                for u in 0..8 {
                    for v in 0..8 {
                        let mut acc = 0.0;
                        for y in 0..8 {
                            for x in 0..8 {
                                acc += basis[v][y] * basis[u][x] * block[y][x];
                            }
                        }
                        let t = table[v * 8 + u];
                        coef[v][u] = (acc / t).round() * t;
                    }
                }
                for y in 0..8 {
                    for x in 0..8 {
                        let (xx, yy) = (bx + x, by + y);
                        if xx >= w || yy >= h {
                            continue;
                        }
                        let mut acc = 0.0;
                        for v in 0..8 {
                            for u in 0..8 {
                                acc += basis[v][y] * basis[u][x] * coef[v][u];
                            }
                        }
                        out[(yy * w + xx) * CHANNELS + c] = quantize(acc + 128.0);
                    }
                }
            }
        }
    }
    ImageBuffer::from_u8(w, h, out).expect("same size")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(w: usize, h: usize, seed: u64) -> ImageBuffer {
        let mut r = crate::rng::CounterRng::new(seed);
        ImageBuffer::from_u8(w, h, (0..w * h * 3).map(|_| r.next_u64() as u8).collect()).unwrap()
    }

    #[test]
    fn identity_parameters_are_no_ops() {
        let img = noise(37, 29, 1);
        for spec in [
            TransformSpec::Identity,
            TransformSpec::Brightness(1.0),
            TransformSpec::Contrast(1.0),
            TransformSpec::Saturation(1.0),
            TransformSpec::Sharpness(1.0),
            TransformSpec::Resize(1.0),
            TransformSpec::Crop(1.0),
        ] {
            assert_eq!(apply_attack(&img, &spec, 0).unwrap(), img, "{spec}");
        }
    }

    #[test]
    fn crop_quarter_area_is_half_side() {
        let img = noise(256, 256, 2);
        let out = apply_attack(&img, &TransformSpec::Crop(0.25), 0).unwrap();
        assert_eq!(out, img.crop(64, 64, 128, 128).unwrap());
    }

    #[test]
    fn invalid_params_rejected() {
        let img = noise(8, 8, 3);
        for spec in [
            TransformSpec::Crop(0.0),
            TransformSpec::Resize(1.5),
            TransformSpec::Brightness(-1.0),
            TransformSpec::JpegApprox(0),
            TransformSpec::Centercrop(9),
        ] {
            assert!(apply_attack(&img, &spec, 0).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn brightness_and_contrast_closed_forms() {
        let img = ImageBuffer::filled(4, 4, 100);
        let b = apply_attack(&img, &TransformSpec::Brightness(2.0), 0).unwrap();
        assert!(b.as_u8().unwrap().iter().all(|&v| v == 200));
        let c = apply_attack(&img, &TransformSpec::Contrast(2.0), 0).unwrap();
        assert_eq!(c, img);
        let blur = apply_attack(&img, &TransformSpec::Blur, 0).unwrap();
        assert_eq!(blur, img);
    }

    #[test]
    fn jpeg_keeps_flat_blocks_and_changes_noise() {
        let flat = ImageBuffer::filled(16, 16, 128);
        assert_eq!(apply_attack(&flat, &TransformSpec::JpegApprox(50), 0).unwrap(), flat);
        let n = noise(16, 16, 4);
        let j = apply_attack(&n, &TransformSpec::JpegApprox(10), 0).unwrap();
        assert_ne!(j, n);
        assert!(crate::imaging::psnr(&j, &n).unwrap() > 5.0);
    }

    #[test]
    fn overlay_stamps_white_pixels() {
        let img = ImageBuffer::filled(64, 64, 0);
        let out = apply_attack(&img, &TransformSpec::OverlayText(2), 0).unwrap();
        let white = out.as_u8().unwrap().iter().filter(|&&v| v == 255).count();
        assert!(white > 0 && white < 64 * 64 * 3 / 4);
    }

    #[test]
    fn suite_entries_expand() {
        let e = SuiteEntry {
            op: "crop".into(),
            param: None,
            params: Some(vec![serde_json_number::Number::Real(0.1), serde_json_number::Number::Real(0.5)]),
        };
        assert_eq!(e.expand().unwrap(), vec![TransformSpec::Crop(0.1), TransformSpec::Crop(0.5)]);
        let b = SuiteEntry { op: "blur".into(), param: None, params: None };
        assert_eq!(b.expand().unwrap(), vec![TransformSpec::Blur]);
        let bad = SuiteEntry { op: "melt".into(), param: None, params: None };
        assert!(bad.expand().is_err());
    }

    #[test]
    fn suite_labels() {
        let labels: Vec<String> = robustness_suite().iter().map(|s| s.label()).collect();
        assert_eq!(labels, ["none", "C-0.1", "C-0.5", "R-0.5", "BL", "BR-2", "CON-2"]);
    }

    #[test]
    fn spec_serde_shape() {
        let s = serde_json::to_string(&TransformSpec::Crop(0.5)).unwrap();
        assert_eq!(s, r#"{"op":"crop","param":0.5}"#);
        let b: TransformSpec = serde_json::from_str(r#"{"op":"blur"}"#).unwrap();
        assert_eq!(b, TransformSpec::Blur);
    }
}
