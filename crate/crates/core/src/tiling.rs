//! Tile selection: uniform random origin, random complete grid cell, or the
//! top-left corner.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::imaging::{ImageBuffer, CHANNELS};
use crate::rng::{derive_key, CounterRng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileStrategy {
    Random,
    #[default]
    RandomGrid,
    Fixed,
}

impl fmt::Display for TileStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TileStrategy::Random => "random",
            TileStrategy::RandomGrid => "random_grid",
            TileStrategy::Fixed => "fixed",
        })
    }
}

impl FromStr for TileStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(TileStrategy::Random),
            "random_grid" | "random-grid" => Ok(TileStrategy::RandomGrid),
            "fixed" => Ok(TileStrategy::Fixed),
            _ => invalid(format!("unknown tile strategy '{s}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileSpec {
    pub size: usize,
    pub strategy: TileStrategy,
    pub seed: u64,
}

impl TileSpec {
    pub fn new(size: usize, strategy: TileStrategy, seed: u64) -> Self {
        Self { size, strategy, seed }
    }

    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.size == 0 || self.size > width.min(height) {
            return invalid(format!("tile size {} does not fit a {width}x{height} image", self.size));
        }
        Ok(())
    }

    /// The spec used for the `index`-th image of a batch; keeps selections
    /// independent of processing order.
    pub fn for_image(&self, index: u64) -> TileSpec {
        TileSpec { seed: derive_key(self.seed, index), ..*self }
    }
}

impl Default for TileSpec {
    fn default() -> Self {
        Self { size: 64, strategy: TileStrategy::RandomGrid, seed: 0 }
    }
}

/// Top-left origin and side of a square tile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TileRef {
    pub x: usize,
    pub y: usize,
    pub size: usize,
}

impl TileRef {
    /// Copies the tile's samples (normalized form), row-major interleaved.
    pub fn samples(&self, img: &ImageBuffer) -> Result<Vec<f64>> {
        if self.x + self.size > img.width() || self.y + self.size > img.height() {
            return invalid(format!("tile {self:?} outside {}x{}", img.width(), img.height()));
        }
        let l = self.size;
        let mut out = Vec::with_capacity(l * l * CHANNELS);
        match img.samples() {
            crate::imaging::Samples::Normalized(v) => {
                for r in self.y..self.y + l {
                    let s = img.index(self.x, r, 0);
                    out.extend_from_slice(&v[s..s + l * CHANNELS]);
                }
            }
            crate::imaging::Samples::U8(v) => {
                for r in self.y..self.y + l {
                    let s = img.index(self.x, r, 0);
                    out.extend(v[s..s + l * CHANNELS].iter().map(|&b| crate::imaging::normalize(b)));
                }
            }
        }
        Ok(out)
    }
}

/// Draws successive tiles from one seeded stream.
#[derive(Clone, Debug)]
pub struct TileSampler {
    size: usize,
    strategy: TileStrategy,
    rng: CounterRng,
}

impl TileSampler {
    pub fn new(spec: &TileSpec) -> Self {
        Self { size: spec.size, strategy: spec.strategy, rng: CounterRng::new(spec.seed) }
    }

    pub fn next(&mut self, width: usize, height: usize) -> Result<TileRef> {
        let l = self.size;
        if l == 0 || l > width.min(height) {
            return invalid(format!("tile size {l} does not fit a {width}x{height} image"));
        }
        let (x, y) = match self.strategy {
            TileStrategy::Fixed => (0, 0),
            TileStrategy::Random => {
                let x = self.rng.below((width - l + 1) as u64) as usize;
                let y = self.rng.below((height - l + 1) as u64) as usize;
                (x, y)
            }
            TileStrategy::RandomGrid => {
                let cols = width / l;
                let rows = height / l;
                let cell = self.rng.below((cols * rows) as u64) as usize;
                ((cell % cols) * l, (cell / cols) * l)
            }
        };
        Ok(TileRef { x, y, size: l })
    }
}

/// First tile drawn from `spec`'s seed.
pub fn select_tile(img: &ImageBuffer, spec: &TileSpec) -> Result<TileRef> {
    TileSampler::new(spec).next(img.width(), img.height())
}

/// All complete l×l cells in row-major order.
pub fn grid_cells(width: usize, height: usize, l: usize) -> Vec<TileRef> {
    if l == 0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity((width / l) * (height / l));
    for r in 0..height / l {
        for c in 0..width / l {
            out.push(TileRef { x: c * l, y: r * l, size: l });
        }
    }
    out
}
