//! Warm-up profiling of the detection stages.

use std::time::Instant;

use crate::detect::{DetectionConfig, Detector, Extracted};
use crate::error::{invalid, Result};
use crate::imaging::{ImageBuffer, CHANNELS, WORK_SIZE};
use crate::sched::StageProfile;

/// Measures one stage run, in milliseconds.
pub trait StageTimer {
    fn measure(&self, stage: usize, run: &mut dyn FnMut()) -> f64;
}

/// Wall-clock timer.
#[derive(Clone, Copy, Debug, Default)]
pub struct WallClock;

impl StageTimer for WallClock {
    fn measure(&self, _stage: usize, run: &mut dyn FnMut()) -> f64 {
        let t = Instant::now();
        run();
        t.elapsed().as_secs_f64() * 1e3
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Per-sample peak buffer bytes of each stage for the given images.
pub fn stage_bytes(images: &[ImageBuffer], cfg: &DetectionConfig) -> [f64; 3] {
    let input = images.iter().map(|i| i.width() * i.height() * CHANNELS).max().unwrap_or(0);
    let work = WORK_SIZE * WORK_SIZE * CHANNELS * std::mem::size_of::<f64>();
    let l = cfg.tile.size;
    // tile copy, residual and phase-aligned residual
    let tile = 3 * l * l * CHANNELS * std::mem::size_of::<f64>();
    let code = &cfg.code;
    let system = code.n() * (2 * code.t() + code.k() + 1) * std::mem::size_of::<u16>();
    [(input + work) as f64, (work + tile) as f64, (system + code.codeword_bits()) as f64]
}

/// Runs every stage over the whole image set `w` times after one untimed
/// pass and reports the median time per stage with `b0` equal to the image count. The codebook
/// is disabled so repeated runs measure full decoding.
pub fn warmup_profile(images: &[ImageBuffer], w: usize, cfg: &DetectionConfig, timer: &dyn StageTimer) -> Result<StageProfile> {
    if images.is_empty() {
        return invalid("warm-up needs at least one image");
    }
    if w == 0 {
        return invalid("warm-up needs at least one iteration");
    }
    let mut cfg = cfg.clone();
    cfg.cache.enabled = false;
    let det = Detector::new(cfg.clone())?;
    let mut times: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(w + 1)).collect();
    // one untimed pass first so allocator and cache effects settle
    for it in 0..=w {
        let mut pre = Vec::new();
        times[0].push(timer.measure(0, &mut || {
            pre = images.iter().map(|i| det.stage_preprocess(i)).collect();
        }));
        let mut ex: Vec<Result<Extracted>> = Vec::new();
        times[1].push(timer.measure(1, &mut || {
            ex = pre.iter().enumerate().map(|(i, p)| det.stage_decode(i, p)).collect();
        }));
        let ex = ex.into_iter().collect::<Result<Vec<_>>>()?;
        let mut ex = Some(ex);
        times[2].push(timer.measure(2, &mut || {
            for (i, e) in ex.take().unwrap_or_default().into_iter().enumerate() {
                std::hint::black_box(det.stage_correct(i, e, None));
            }
        }));
        if it == 0 {
            times.iter_mut().for_each(Vec::clear);
        }
    }
    let t = times.into_iter().map(median).map(|v| v.max(1e-9)).collect();
    StageProfile::new(t, stage_bytes(images, &cfg).to_vec(), images.len())
}
