//! Seeded synthetic photographs: smooth color fields with soft shapes and
//! light sensor noise. Content statistics are position-independent.

use crate::imaging::ImageBuffer;
use crate::rng::{derive_key, CounterRng};

/// One synthetic RGB image; identical for identical (seed, size).
pub fn synth_image(seed: u64, width: usize, height: usize) -> ImageBuffer {
    let mut r = CounterRng::new(seed);
    let base: [f64; 3] = [60.0 + 130.0 * r.unit_f64(), 60.0 + 130.0 * r.unit_f64(), 60.0 + 130.0 * r.unit_f64()];
    // low-frequency waves with random orientation and phase
    let waves: Vec<(f64, f64, f64, [f64; 3])> = (0..4)
        .map(|_| {
            let theta = r.unit_f64() * std::f64::consts::TAU;
            let freq = (0.5 + 3.0 * r.unit_f64()) * std::f64::consts::TAU / width.max(height) as f64;
            let phase = r.unit_f64() * std::f64::consts::TAU;
            let amp = [15.0 * r.unit_f64(), 15.0 * r.unit_f64(), 15.0 * r.unit_f64()];
            (freq * theta.cos(), freq * theta.sin(), phase, amp)
        })
        .collect();
    // soft discs: center, radius, color shift
    let discs: Vec<(f64, f64, f64, [f64; 3])> = (0..5)
        .map(|_| {
            let cx = r.unit_f64() * width as f64;
            let cy = r.unit_f64() * height as f64;
            let rad = (0.05 + 0.2 * r.unit_f64()) * width.min(height) as f64;
            let shift = [40.0 * (r.unit_f64() - 0.5), 40.0 * (r.unit_f64() - 0.5), 40.0 * (r.unit_f64() - 0.5)];
            (cx, cy, rad, shift)
        })
        .collect();
    let mut noise = CounterRng::new(derive_key(seed, 0x6e6f_6973_65));
    // sin(kx·x + ky·y + φ) split into per-column and per-row factors
    let cols: Vec<Vec<(f64, f64)>> = waves.iter().map(|w| (0..width).map(|x| (w.0 * x as f64).sin_cos()).collect()).collect();
    let rows: Vec<Vec<(f64, f64)>> = waves.iter().map(|w| (0..height).map(|y| (w.1 * y as f64 + w.2).sin_cos()).collect()).collect();
    // the disc edge is a logistic of width 3; beyond ±120 it is saturated
    const EDGE: f64 = 120.0;
    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        for x in 0..width {
            let (fx, fy) = (x as f64, y as f64);
            let mut px = base;
            for (i, w) in waves.iter().enumerate() {
                let ((sx, cx), (sy, cy)) = (cols[i][x], rows[i][y]);
                let s = sx * cy + cx * sy;
                for c in 0..3 {
                    px[c] += w.3[c] * s;
                }
            }
            for &(cx, cy, rad, shift) in &discs {
                let d2 = (fx - cx).powi(2) + (fy - cy).powi(2);
                let wgt = if d2 > (rad + EDGE).powi(2) {
                    continue;
                } else if rad > EDGE && d2 < (rad - EDGE).powi(2) {
                    1.0
                } else {
                    1.0 / (1.0 + ((d2.sqrt() - rad) / 3.0).exp())
                };
                for c in 0..3 {
                    px[c] += shift[c] * wgt;
                }
            }
            for v in px {
                let n = (noise.unit_f64() - 0.5) * 4.0;
                data.push((v + n).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    ImageBuffer::from_u8(width, height, data).expect("consistent size")
}

/// `count` images with sizes cycling through `sizes`; image i uses seed
/// `derive_key(seed, i)`.
pub fn synth_corpus(seed: u64, count: usize, sizes: &[(usize, usize)]) -> Vec<ImageBuffer> {
    (0..count)
        .map(|i| {
            let (w, h) = sizes[i % sizes.len()];
            synth_image(derive_key(seed, i as u64), w, h)
        })
        .collect()
}
