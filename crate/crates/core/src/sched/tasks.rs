//! Per-image task construction from warm-up statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{lpt::Task, StageProfile};
use crate::error::{invalid, Result};
use crate::imaging::ImageBuffer;

/// Chooses a tile size for an image.
pub trait TileSizePredictor {
    fn select_tile_size(&self, img: &ImageBuffer) -> usize;
}

/// Always the same size.
#[derive(Clone, Copy, Debug)]
pub struct ConstantPredictor(pub usize);

impl TileSizePredictor for ConstantPredictor {
    fn select_tile_size(&self, _img: &ImageBuffer) -> usize {
        self.0
    }
}

impl<F: Fn(&ImageBuffer) -> usize> TileSizePredictor for F {
    fn select_tile_size(&self, img: &ImageBuffer) -> usize {
        self(img)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Detect,
    Embed,
}

/// Warm-up measurements at a reference tile size, optionally with explicit
/// per-size measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarmupStats {
    pub reference_tile: usize,
    pub detect: StageProfile,
    pub embed: StageProfile,
    /// Stages whose cost grows with tile area; the rest are size-independent.
    /// Empty means every stage scales.
    #[serde(default)]
    pub area_scaled: Vec<bool>,
    /// Measured per-image (latency, memory) keyed by mode and tile size.
    #[serde(default)]
    pub per_size: BTreeMap<(Mode, usize), (f64, f64)>,
    /// When false, sizes missing from `per_size` are rejected.
    pub scaling: bool,
}

impl WarmupStats {
    pub fn new(reference_tile: usize, detect: StageProfile, embed: StageProfile) -> Self {
        Self { reference_tile, detect, embed, area_scaled: Vec::new(), per_size: BTreeMap::new(), scaling: true }
    }

    /// Per-image latency and memory for `tile` in `mode`.
    pub fn predict(&self, tile: usize, mode: Mode) -> Result<(f64, f64)> {
        if let Some(&v) = self.per_size.get(&(mode, tile)) {
            return Ok(v);
        }
        if !self.scaling {
            return invalid(format!("no warm-up data for tile size {tile} and scaling is disabled"));
        }
        if tile == 0 || self.reference_tile == 0 {
            return invalid("tile sizes must be positive");
        }
        let prof = match mode {
            Mode::Detect => &self.detect,
            Mode::Embed => &self.embed,
        };
        let r = tile as f64 / self.reference_tile as f64;
        let area = r * r;
        let mut lat = 0.0;
        let mut mem: f64 = 0.0;
        for k in 0..prof.stages() {
            let f = if self.area_scaled.get(k).copied().unwrap_or(true) { area } else { 1.0 };
            lat += prof.t[k] / prof.b0 as f64 * f;
            mem = mem.max(prof.u[k] * f);
        }
        Ok((lat, mem))
    }
}

/// One task per image, with latency and memory from `stats`.
pub fn build_tasks(
    images: &[ImageBuffer],
    predictor: &dyn TileSizePredictor,
    stats: &WarmupStats,
    mode: Mode,
) -> Result<Vec<Task>> {
    images
        .iter()
        .enumerate()
        .map(|(i, img)| {
            let tile = predictor.select_tile_size(img);
            let (lat, mem) = stats.predict(tile, mode)?;
            Ok(Task::new(i, tile, lat, mem, 1))
        })
        .collect()
}
