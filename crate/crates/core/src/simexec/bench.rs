//! Throughput measurements: a synthetic staged workload with prescribed
//! per-item costs, and the real pipeline across batch sizes.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::desk::run_desk;
use crate::detect::Detector;
use crate::error::Result;
use crate::exec::run3;
use crate::imaging::ImageBuffer;
use crate::sched::{StageProfile, StreamPlan};

/// How a synthetic stage spends its cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Blocks without using the CPU, like waiting on an offloaded kernel.
    Wait,
    /// Busy-loops on the CPU.
    Spin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub label: String,
    pub batch: usize,
    pub workers: Vec<usize>,
    pub wall_ms: f64,
    /// Mean per-image latency over the batch.
    pub latency_ms: f64,
    pub throughput: f64,
}

fn spend(d: Duration, mode: CostMode) {
    match mode {
        CostMode::Wait => std::thread::sleep(d),
        CostMode::Spin => {
            let t = Instant::now();
            while t.elapsed() < d {
                std::hint::spin_loop();
            }
        }
    }
}

/// Pushes `items` through three stages whose per-item cost is
/// `t[k]/b0 · unit`, with `workers[k]` threads each.
pub fn synthetic_run(profile: &StageProfile, workers: [usize; 3], items: usize, unit: Duration, mode: CostMode) -> BenchRow {
    let cost: Vec<Duration> = profile.t.iter().map(|&t| unit.mul_f64(t / profile.b0 as f64)).collect();
    let queue = 2 * workers.iter().copied().max().unwrap_or(1);
    let (_, stats) = run3(
        (0..items).collect::<Vec<_>>(),
        workers,
        queue,
        |_, x| {
            spend(cost[0], mode);
            x
        },
        |_, x| {
            spend(cost[1], mode);
            x
        },
        |_, x| {
            spend(cost[2], mode);
            x
        },
    );
    let wall = stats.wall.as_secs_f64();
    BenchRow {
        label: format!("synthetic-{mode:?}").to_lowercase(),
        batch: items,
        workers: workers.to_vec(),
        wall_ms: wall * 1e3,
        latency_ms: wall * 1e3 / items.max(1) as f64,
        throughput: items as f64 / wall.max(1e-12),
    }
}

/// Runs the desk executor on the first `b` images for each batch size.
pub fn bench_desk(
    label: &str,
    plan: &StreamPlan,
    images: &[ImageBuffer],
    detector: &Detector,
    batch_sizes: &[usize],
) -> Result<Vec<BenchRow>> {
    batch_sizes
        .iter()
        .map(|&b| {
            let b = b.min(images.len());
            let (_, rep) = run_desk(plan, &images[..b], None, detector)?;
            let wall_ms = rep.wall_ns as f64 * 1e-6;
            Ok(BenchRow {
                label: label.to_string(),
                batch: b,
                workers: rep.workers,
                wall_ms,
                latency_ms: wall_ms / b.max(1) as f64,
                throughput: rep.throughput,
            })
        })
        .collect()
}
