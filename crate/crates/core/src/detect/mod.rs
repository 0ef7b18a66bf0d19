//! Detection pipeline: preprocess → tile and extract → RS correction →
//! verification.

mod cache;
mod verify;

pub use cache::{correct_with_cache, CacheConfig, Codebook};
pub use verify::{threshold, verify};

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{invalid, Result};
use crate::exec::{run3, PipelineStats};
use crate::imaging::{preprocess_fused, ImageBuffer, WORK_SIZE};
use crate::rscodec::{rs_encode, CodeParams};
use crate::sched::StreamPlan;
use crate::stegocodec::{harden, SpreadSpectrum, StegoCodec, WatermarkKey};
use crate::tiling::{TileRef, TileSampler, TileSpec};

#[derive(Clone, Debug)]
pub struct DetectionConfig {
    pub code: CodeParams,
    pub tile: TileSpec,
    pub key: WatermarkKey,
    /// Information bits the detector verifies against.
    pub message: Bits,
    pub rs_workers: usize,
    pub fpr_target: f64,
    pub cache: CacheConfig,
    /// Mini-batch used to size inter-stage queues (twice this many items).
    pub mini_batch: usize,
    /// On decode failure, verify the raw bits against the reference
    /// codeword instead of rejecting outright.
    pub raw_fallback: bool,
}

impl DetectionConfig {
    pub fn new(code: CodeParams, key: WatermarkKey, message: Bits) -> Self {
        Self {
            code,
            tile: TileSpec::default(),
            key,
            message,
            rs_workers: 32,
            fpr_target: 1e-6,
            cache: CacheConfig::default(),
            mini_batch: 16,
            raw_fallback: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.key.n_bits != self.code.codeword_bits() {
            return invalid(format!(
                "key carries {} bits but the code emits {}",
                self.key.n_bits,
                self.code.codeword_bits()
            ));
        }
        if self.message.len() != self.code.message_bits() {
            return invalid(format!(
                "reference message has {} bits, code expects {}",
                self.message.len(),
                self.code.message_bits()
            ));
        }
        self.tile.validate(WORK_SIZE, WORK_SIZE)?;
        if self.rs_workers == 0 {
            return invalid("rs_workers must be at least 1");
        }
        if !(self.fpr_target > 0.0 && self.fpr_target < 1.0) {
            return invalid(format!("fpr target {} outside (0, 1)", self.fpr_target));
        }
        if self.cache.capacity == 0 {
            return invalid("cache capacity must be at least 1");
        }
        if self.mini_batch == 0 {
            return invalid("mini-batch must be at least 1");
        }
        Ok(())
    }
}

/// Wall-clock nanoseconds per stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageLatencies {
    pub preprocess: u64,
    pub decode: u64,
    pub correct: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub index: usize,
    pub tile: TileRef,
    pub raw_bits: Bits,
    /// Corrected information bits; absent on decode failure.
    pub corrected: Option<Bits>,
    pub errors_corrected: usize,
    /// Information-bit accuracy against the ground truth, when provided.
    pub bit_acc: Option<f64>,
    /// Whether the recovered message equals the ground truth.
    pub word_match: Option<bool>,
    pub verified: bool,
    pub cache_hit: bool,
    pub latencies: StageLatencies,
}

impl DetectionRecord {
    /// Copy with timing and cache-hit fields cleared, for comparisons.
    pub fn without_timing(&self) -> Self {
        Self { latencies: StageLatencies::default(), cache_hit: false, ..self.clone() }
    }
}

/// Owns the codec, cache and precomputed thresholds for one configuration.
pub struct Detector {
    cfg: DetectionConfig,
    codec: Arc<dyn StegoCodec>,
    reference_code: Bits,
    tau_message: usize,
    tau_code: usize,
    cache: Option<Codebook>,
}

/// Output of the tile/extract stage.
pub struct Extracted {
    pub tile: TileRef,
    pub raw: Bits,
}

fn nanos(t: Instant) -> u64 {
    t.elapsed().as_nanos() as u64
}

impl Detector {
    pub fn new(cfg: DetectionConfig) -> Result<Self> {
        Self::with_codec(cfg, Arc::new(SpreadSpectrum::new()))
    }

    pub fn with_codec(cfg: DetectionConfig, codec: Arc<dyn StegoCodec>) -> Result<Self> {
        cfg.validate()?;
        let reference_code = rs_encode(&cfg.message, &cfg.code)?.into_bits();
        let tau_message = threshold(cfg.code.message_bits(), cfg.fpr_target)?;
        let tau_code = threshold(cfg.code.codeword_bits(), cfg.fpr_target)?;
        let cache = if cfg.cache.enabled { Some(Codebook::new(cfg.cache)?) } else { None };
        Ok(Self { cfg, codec, reference_code, tau_message, tau_code, cache })
    }

    pub fn config(&self) -> &DetectionConfig {
        &self.cfg
    }

    pub fn cache(&self) -> Option<&Codebook> {
        self.cache.as_ref()
    }

    pub fn reference_codeword(&self) -> &Bits {
        &self.reference_code
    }

    /// Match-count thresholds for (information bits, full codeword).
    pub fn thresholds(&self) -> (usize, usize) {
        (self.tau_message, self.tau_code)
    }

    pub fn stage_preprocess(&self, img: &ImageBuffer) -> ImageBuffer {
        preprocess_fused(img)
    }

    /// Selects the tile for image `index` and hardens the extractor output.
    pub fn stage_decode(&self, index: usize, pre: &ImageBuffer) -> Result<Extracted> {
        let spec = self.cfg.tile.for_image(index as u64);
        let tile = TileSampler::new(&spec).next(pre.width(), pre.height())?;
        let samples = tile.samples(pre)?;
        let soft = self.codec.extract(&samples, tile, &self.cfg.key)?;
        Ok(Extracted { tile, raw: harden(&soft) })
    }

    /// RS correction, verification and accuracy bookkeeping.
    pub fn stage_correct(&self, index: usize, ex: Extracted, truth: Option<&Bits>) -> DetectionRecord {
        let (res, cache_hit) = correct_with_cache(&ex.raw, self.cache.as_ref(), &self.cfg.code);
        let k_bits = self.cfg.code.message_bits();
        let (corrected, errors_corrected, verified) = match res {
            Ok(d) => {
                let ok = self.cfg.message.len() - d.message.hamming(&self.cfg.message) >= self.tau_message;
                (Some(d.message), d.errors_corrected, ok)
            }
            Err(_) => {
                let n = ex.raw.len();
                let ok = self.cfg.raw_fallback && n - ex.raw.hamming(&self.reference_code) >= self.tau_code;
                (None, 0, ok)
            }
        };
        let (bit_acc, word_match) = match truth {
            Some(g) if g.len() == k_bits => {
                let got = corrected.clone().unwrap_or_else(|| ex.raw.slice(0, k_bits));
                let acc = 1.0 - got.hamming(g) as f64 / k_bits as f64;
                (Some(acc), Some(corrected.as_ref() == Some(g)))
            }
            _ => (None, None),
        };
        DetectionRecord {
            index,
            tile: ex.tile,
            raw_bits: ex.raw,
            corrected,
            errors_corrected,
            bit_acc,
            word_match,
            verified,
            cache_hit,
            latencies: StageLatencies::default(),
        }
    }

    /// Sequential detection of image `index`.
    pub fn detect_at(&self, index: usize, img: &ImageBuffer, truth: Option<&Bits>) -> Result<DetectionRecord> {
        let t0 = Instant::now();
        let pre = self.stage_preprocess(img);
        let preprocess = nanos(t0);
        let t1 = Instant::now();
        let ex = self.stage_decode(index, &pre)?;
        let decode = nanos(t1);
        let t2 = Instant::now();
        let mut rec = self.stage_correct(index, ex, truth);
        rec.latencies = StageLatencies { preprocess, decode, correct: nanos(t2) };
        Ok(rec)
    }

    /// Batch detection with stage pools sized by `plan` (one worker each by
    /// default) and `rs_workers` threads on the correction stage.
    pub fn detect_batch(
        &self,
        images: &[ImageBuffer],
        truths: Option<&[Bits]>,
        plan: Option<&StreamPlan>,
    ) -> Result<Vec<DetectionRecord>> {
        let (w0, w1) = plan.map_or((1, 1), |p| (p.s.first().copied().unwrap_or(1), p.s.get(1).copied().unwrap_or(1)));
        let queue = 2 * plan.and_then(|p| p.m.iter().copied().max()).unwrap_or(self.cfg.mini_batch);
        self.run_pipeline(images, truths, [w0, w1, self.cfg.rs_workers], queue).map(|(r, _)| r)
    }

    /// Runs the three stages on worker pools of the given sizes.
    pub fn run_pipeline(
        &self,
        images: &[ImageBuffer],
        truths: Option<&[Bits]>,
        workers: [usize; 3],
        queue_cap: usize,
    ) -> Result<(Vec<DetectionRecord>, PipelineStats)> {
        if let Some(t) = truths {
            if t.len() != images.len() {
                return invalid(format!("{} ground truths for {} images", t.len(), images.len()));
            }
        }
        let (out, stats) = run3(
            (0..images.len()).collect(),
            workers,
            queue_cap,
            |_, i: usize| {
                let t = Instant::now();
                let pre = self.stage_preprocess(&images[i]);
                (i, pre, nanos(t))
            },
            |_, (i, pre, p_ns): (usize, ImageBuffer, u64)| {
                let t = Instant::now();
                let ex = self.stage_decode(i, &pre);
                (i, ex, p_ns, nanos(t))
            },
            |_, (i, ex, p_ns, d_ns): (usize, Result<Extracted>, u64, u64)| {
                let t = Instant::now();
                ex.map(|ex| {
                    let mut rec = self.stage_correct(i, ex, truths.map(|g| &g[i]));
                    rec.latencies = StageLatencies { preprocess: p_ns, decode: d_ns, correct: nanos(t) };
                    rec
                })
            },
        );
        let records = out.into_iter().collect::<Result<Vec<_>>>()?;
        Ok((records, stats))
    }
}

/// Detects one image with a fresh detector.
pub fn detect_one(img: &ImageBuffer, cfg: &DetectionConfig) -> Result<DetectionRecord> {
    Detector::new(cfg.clone())?.detect_at(0, img, None)
}

/// Detects a batch with a fresh detector; record i belongs to image i.
pub fn detect_batch(images: &[ImageBuffer], cfg: &DetectionConfig, plan: Option<&StreamPlan>) -> Result<Vec<DetectionRecord>> {
    Detector::new(cfg.clone())?.detect_batch(images, None, plan)
}

/// Preprocesses `img`, embeds the RS codeword of `message` with period
/// `tile_size`, and quantizes to 8 bits.
pub fn watermark_image(
    img: &ImageBuffer,
    message: &Bits,
    code: &CodeParams,
    key: &WatermarkKey,
    tile_size: usize,
    codec: &SpreadSpectrum,
) -> Result<ImageBuffer> {
    let cw = rs_encode(message, code)?;
    let pre = preprocess_fused(img);
    Ok(codec.embed_image(&pre, cw.bits(), key, tile_size)?.to_u8())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::synth_image;

    fn setup() -> (DetectionConfig, SpreadSpectrum) {
        let code = CodeParams::gf16_15_12();
        let key = WatermarkKey::new(11, 60, 0.05).unwrap();
        let msg = Bits::from_hex("0123456789ab").unwrap();
        (DetectionConfig::new(code, key, msg), SpreadSpectrum::new())
    }

    #[test]
    fn embedded_image_verifies() {
        let (cfg, codec) = setup();
        let img = watermark_image(&synth_image(1, 300, 280), &cfg.message, &cfg.code, &cfg.key, 64, &codec).unwrap();
        let rec = detect_one(&img, &cfg).unwrap();
        assert!(rec.verified);
        assert_eq!(rec.errors_corrected, 0);
        assert_eq!(rec.corrected.as_ref(), Some(&cfg.message));
    }

    #[test]
    fn clean_image_does_not_verify() {
        let (cfg, _) = setup();
        let rec = detect_one(&synth_image(2, 256, 256), &cfg).unwrap();
        assert!(!rec.verified);
    }

    #[test]
    fn config_validation() {
        let (mut cfg, _) = setup();
        cfg.rs_workers = 0;
        assert!(detect_one(&synth_image(2, 64, 64), &cfg).is_err());
        let (mut cfg, _) = setup();
        cfg.tile.size = 300;
        assert!(Detector::new(cfg).is_err());
        let (mut cfg, _) = setup();
        cfg.key.n_bits = 48;
        assert!(Detector::new(cfg).is_err());
    }

    #[test]
    fn batch_of_one_matches_single() {
        let (cfg, codec) = setup();
        let img = watermark_image(&synth_image(3, 256, 256), &cfg.message, &cfg.code, &cfg.key, 64, &codec).unwrap();
        let a = detect_one(&img, &cfg).unwrap();
        let b = detect_batch(std::slice::from_ref(&img), &cfg, None).unwrap();
        assert_eq!(a.without_timing(), b[0].without_timing());
    }
}
