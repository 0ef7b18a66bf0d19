//! Threaded desk executor: the real detection pipeline with one worker pool
//! per stage, sized by a stream plan.

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::detect::{DetectionRecord, Detector};
use crate::error::{invalid, Result};
use crate::imaging::ImageBuffer;
use crate::sched::StreamPlan;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeskReport {
    pub images: usize,
    pub workers: Vec<usize>,
    pub wall_ns: u64,
    pub stage_busy_ns: Vec<u64>,
    /// Each stage's fraction of total busy time.
    pub stage_share: Vec<f64>,
    /// Images per second.
    pub throughput: f64,
}

/// Runs `images` through `detector` with `plan.s[k]` workers on stage k.
pub fn run_desk(
    plan: &StreamPlan,
    images: &[ImageBuffer],
    truths: Option<&[Bits]>,
    detector: &Detector,
) -> Result<(Vec<DetectionRecord>, DeskReport)> {
    if plan.s.len() != 3 || plan.s.contains(&0) {
        return invalid(format!("desk executor needs three stages with at least one stream, got {:?}", plan.s));
    }
    let workers = [plan.s[0], plan.s[1], plan.s[2]];
    let queue = 2 * plan.m.iter().copied().max().unwrap_or(1).max(1);
    let (records, stats) = detector.run_pipeline(images, truths, workers, queue)?;
    let busy: Vec<u64> = stats.stages.iter().map(|s| s.busy.as_nanos() as u64).collect();
    let total: u64 = busy.iter().sum();
    let wall_ns = stats.wall.as_nanos() as u64;
    Ok((
        records,
        DeskReport {
            images: images.len(),
            workers: workers.to_vec(),
            wall_ns,
            stage_share: busy.iter().map(|&b| if total == 0 { 0.0 } else { b as f64 / total as f64 }).collect(),
            stage_busy_ns: busy,
            throughput: if wall_ns == 0 { 0.0 } else { images.len() as f64 / (wall_ns as f64 * 1e-9) },
        },
    ))
}
