//! Spread-spectrum watermark codec.
//!
//! Bit i owns a ±1 pattern P_i over the l×l×3 samples of a tile, drawn from
//! the counter RNG keyed by (seed, i). Embedding adds
//! α·N^{-1/2}·Σ (2b_i − 1)·P_i, tiled with period l over the whole image, so
//! α is the per-sample RMS of the perturbation. Extraction removes the
//! local 3×3 mean from the tile and correlates the residual with each
//! pattern at the tile's phase (origin mod l).

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{invalid, Result};
use crate::imaging::{ImageBuffer, CHANNELS};
use crate::rng::{derive_key, draw};
use crate::tiling::TileRef;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WatermarkKey {
    pub seed: u64,
    pub n_bits: usize,
    pub alpha: f64,
}

impl WatermarkKey {
    pub fn new(seed: u64, n_bits: usize, alpha: f64) -> Result<Self> {
        if n_bits == 0 {
            return invalid("payload length must be positive");
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return invalid(format!("alpha must be finite and non-negative, got {alpha}"));
        }
        Ok(Self { seed, n_bits, alpha })
    }
}

/// Pre-threshold extractor scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftBits {
    pub values: Vec<f64>,
}

/// 1 where the score is strictly positive.
pub fn harden(soft: &SoftBits) -> Bits {
    Bits::new(soft.values.iter().map(|&v| v > 0.0).collect())
}

/// Embed/extract contract for a tile-level watermark codec. Tile samples
/// are normalized, row-major interleaved RGB.
pub trait StegoCodec: Send + Sync {
    fn embed(&self, tile: &[f64], at: TileRef, bits: &Bits, key: &WatermarkKey) -> Result<Vec<f64>>;
    fn extract(&self, tile: &[f64], at: TileRef, key: &WatermarkKey) -> Result<SoftBits>;
}

/// ±1 patterns for one (seed, n_bits, l).
#[derive(Debug)]
pub struct Patterns {
    l: usize,
    bits: Vec<Vec<i8>>,
}

impl Patterns {
    pub fn generate(seed: u64, n_bits: usize, l: usize) -> Self {
        let len = l * l * CHANNELS;
        let bits = (0..n_bits)
            .map(|i| {
                let k = derive_key(seed, i as u64);
                (0..len as u64).map(|j| if draw(k, j) >> 63 == 1 { 1 } else { -1 }).collect()
            })
            .collect();
        Self { l, bits }
    }

    pub fn size(&self) -> usize {
        self.l
    }

    pub fn pattern(&self, i: usize) -> &[i8] {
        &self.bits[i]
    }

    /// The embedding perturbation δ (before α), indexed in pattern
    /// coordinates.
    fn delta(&self, bits: &Bits) -> Vec<f64> {
        let scale = 1.0 / (self.bits.len() as f64).sqrt();
        let mut d = vec![0.0; self.l * self.l * CHANNELS];
        for (i, p) in self.bits.iter().enumerate() {
            let s = if bits.get(i) { scale } else { -scale };
            for (dv, &pv) in d.iter_mut().zip(p) {
                *dv += s * pv as f64;
            }
        }
        d
    }
}

/// Reference codec with a per-(seed, n_bits, l) pattern cache that is safe
/// for concurrent readers.
#[derive(Debug, Default)]
pub struct SpreadSpectrum {
    cache: RwLock<HashMap<(u64, usize, usize), Arc<Patterns>>>,
}

impl SpreadSpectrum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn patterns(&self, key: &WatermarkKey, l: usize) -> Arc<Patterns> {
        let id = (key.seed, key.n_bits, l);
        if let Some(p) = self.cache.read().expect("pattern cache poisoned").get(&id) {
            return p.clone();
        }
        let p = Arc::new(Patterns::generate(key.seed, key.n_bits, l));
        self.cache
            .write()
            .expect("pattern cache poisoned")
            .entry(id)
            .or_insert(p)
            .clone()
    }

    /// Adds the tiled pattern to every pixel of `img` (normalized output,
    /// same size, clamped to [−1, 1]).
    pub fn embed_image(&self, img: &ImageBuffer, bits: &Bits, key: &WatermarkKey, l: usize) -> Result<ImageBuffer> {
        check_bits(bits, key)?;
        if l == 0 || l > img.width().min(img.height()) {
            return invalid(format!("tile size {l} does not fit {}x{}", img.width(), img.height()));
        }
        let (w, h) = (img.width(), img.height());
        let delta = self.patterns(key, l).delta(bits);
        let mut data = img.clone().into_normalized();
        for y in 0..h {
            let py = y % l;
            for x in 0..w {
                let px = x % l;
                for c in 0..CHANNELS {
                    let v = &mut data[(y * w + x) * CHANNELS + c];
                    *v = (*v + key.alpha * delta[(py * l + px) * CHANNELS + c]).clamp(-1.0, 1.0);
                }
            }
        }
        ImageBuffer::from_normalized(w, h, data)
    }
}

fn check_bits(bits: &Bits, key: &WatermarkKey) -> Result<()> {
    if bits.len() != key.n_bits {
        return invalid(format!("{} bits for a {}-bit key", bits.len(), key.n_bits));
    }
    Ok(())
}

fn check_tile(tile: &[f64], at: TileRef) -> Result<()> {
    if at.size == 0 || tile.len() != at.size * at.size * CHANNELS {
        return invalid(format!("{} samples for a {}x{} tile", tile.len(), at.size, at.size));
    }
    Ok(())
}

/// Index into pattern coordinates of tile-local sample (u, v, c).
#[inline]
fn phase_index(at: TileRef, u: usize, v: usize, c: usize) -> usize {
    let l = at.size;
    let px = (at.x + u) % l;
    let py = (at.y + v) % l;
    (py * l + px) * CHANNELS + c
}

/// Tile minus its per-channel 3×3 box mean, with clamped borders.
fn whiten(tile: &[f64], l: usize) -> Vec<f64> {
    let mut out = vec![0.0; tile.len()];
    for v in 0..l {
        for u in 0..l {
            for c in 0..CHANNELS {
                let mut acc = 0.0;
                for dv in 0..3 {
                    let vv = (v + dv).saturating_sub(1).min(l - 1);
                    for du in 0..3 {
                        let uu = (u + du).saturating_sub(1).min(l - 1);
                        acc += tile[(vv * l + uu) * CHANNELS + c];
                    }
                }
                let i = (v * l + u) * CHANNELS + c;
                out[i] = tile[i] - acc / 9.0;
            }
        }
    }
    out
}

impl StegoCodec for SpreadSpectrum {
    fn embed(&self, tile: &[f64], at: TileRef, bits: &Bits, key: &WatermarkKey) -> Result<Vec<f64>> {
        check_tile(tile, at)?;
        check_bits(bits, key)?;
        let l = at.size;
        let delta = self.patterns(key, l).delta(bits);
        let mut out = tile.to_vec();
        for v in 0..l {
            for u in 0..l {
                for c in 0..CHANNELS {
                    let i = (v * l + u) * CHANNELS + c;
                    out[i] = (out[i] + key.alpha * delta[phase_index(at, u, v, c)]).clamp(-1.0, 1.0);
                }
            }
        }
        Ok(out)
    }

    fn extract(&self, tile: &[f64], at: TileRef, key: &WatermarkKey) -> Result<SoftBits> {
        check_tile(tile, at)?;
        let l = at.size;
        let white = whiten(tile, l);
        // rearrange the residual into pattern coordinates
        let mut aligned = vec![0.0; white.len()];
        for v in 0..l {
            for u in 0..l {
                for c in 0..CHANNELS {
                    aligned[phase_index(at, u, v, c)] = white[(v * l + u) * CHANNELS + c];
                }
            }
        }
        let pats = self.patterns(key, l);
        let n = aligned.len() as f64;
        let values = (0..key.n_bits)
            .map(|i| {
                let dot: f64 = aligned.iter().zip(pats.pattern(i)).map(|(&a, &p)| a * p as f64).sum();
                dot / n
            })
            .collect();
        Ok(SoftBits { values })
    }
}
