//! Longest-processing-time placement with a balance check, memory check and
//! sharding at a minimum mini-batch granularity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub image: usize,
    pub tile: usize,
    pub lat: f64,
    pub mem: f64,
    /// Samples covered; shards split this count.
    pub samples: usize,
    /// Shard ordinal within the original task (0 for unsplit tasks).
    #[serde(default)]
    pub shard: usize,
    /// Mini-batch size assigned by the scheduler.
    #[serde(default)]
    pub mb: usize,
}

impl Task {
    pub fn new(image: usize, tile: usize, lat: f64, mem: f64, samples: usize) -> Self {
        Self { image, tile, lat, mem, samples, shard: 0, mb: 0 }
    }

    /// Splits off `take` samples; latency and memory divide in proportion and
    /// the remainder carries the exact difference.
    fn split(&self, take: usize, next_shard: usize) -> (Task, Task) {
        let frac = take as f64 / self.samples as f64;
        let head = Task { lat: self.lat * frac, mem: self.mem * frac, samples: take, ..self.clone() };
        let tail = Task {
            lat: self.lat - head.lat,
            mem: self.mem - head.mem,
            samples: self.samples - take,
            shard: next_shard,
            ..self.clone()
        };
        (head, tail)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamSchedule {
    pub streams: Vec<Vec<Task>>,
    pub loads: Vec<f64>,
    pub m_unit: usize,
}

impl StreamSchedule {
    pub fn makespan(&self) -> f64 {
        self.loads.iter().copied().fold(0.0, f64::max)
    }

    pub fn task_count(&self) -> usize {
        self.streams.iter().map(Vec::len).sum()
    }
}

/// Memory resident when every stream holds its largest task at once.
fn resident(peaks: &[f64]) -> f64 {
    peaks.iter().sum()
}

/// Places `tasks` on `p` streams.
///
/// The largest remaining task goes to the least-loaded stream (lowest index
/// on ties) when `load + lat ≤ (1+λ)·min load` and memory holds; an empty
/// stream always passes the balance test and `λ = ∞` disables it. Rejected
/// tasks with at least `2·b_min` samples are split into a `b_min`-sample
/// shard, placed now, and the remainder returned to the pool; smaller tasks
/// are placed whole if memory allows.
pub fn lpt_schedule(tasks: &[Task], p: usize, lambda: f64, m_cap: f64, b_min: usize, b: usize) -> Result<StreamSchedule> {
    if p == 0 {
        return Err(Error::InvalidInput("need at least one stream".into()));
    }
    if b_min == 0 {
        return Err(Error::InvalidInput("b_min must be at least 1".into()));
    }
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidInput(format!("balance slack {lambda} must be non-negative")));
    }
    if let Some(t) = tasks.iter().find(|t| !(t.lat > 0.0 && t.lat.is_finite()) || t.mem < 0.0 || t.samples == 0) {
        return Err(Error::InvalidInput(format!("task {} has non-positive latency or size", t.image)));
    }

    let mut pool: Vec<Task> = tasks.to_vec();
    let mut next_shard: Vec<usize> = Vec::new();
    for t in &pool {
        if t.image >= next_shard.len() {
            next_shard.resize(t.image + 1, 1);
        }
    }
    let mut streams: Vec<Vec<Task>> = vec![Vec::new(); p];
    let mut loads = vec![0.0f64; p];
    let mut peaks = vec![0.0f64; p];

    let mem_with = |peaks: &[f64], q: usize, mem: f64| {
        let mut pk = peaks.to_vec();
        pk[q] = pk[q].max(mem);
        resident(&pk) <= m_cap
    };

    while !pool.is_empty() {
        // max latency; ties to the earliest (image, shard)
        let idx = (0..pool.len())
            .max_by(|&a, &b| {
                pool[a]
                    .lat
                    .total_cmp(&pool[b].lat)
                    .then((pool[b].image, pool[b].shard).cmp(&(pool[a].image, pool[a].shard)))
            })
            .expect("non-empty pool");
        let task = pool.swap_remove(idx);
        let q = (0..p)
            .min_by(|&a, &b| loads[a].total_cmp(&loads[b]).then(a.cmp(&b)))
            .expect("p >= 1");
        let min_load = loads[q];
        let balanced = lambda.is_infinite() || loads[q] == 0.0 || loads[q] + task.lat <= (1.0 + lambda) * min_load;
        let fits = mem_with(&peaks, q, task.mem);

        let placed = if balanced && fits {
            task
        } else if task.samples >= 2 * b_min {
            let ord = next_shard[task.image];
            next_shard[task.image] += 1;
            let (head, tail) = task.split(b_min, ord);
            if !mem_with(&peaks, q, head.mem) {
                return Err(Error::InfeasibleConfig(format!(
                    "a {b_min}-sample shard of image {} exceeds the memory cap",
                    head.image
                )));
            }
            pool.push(tail);
            head
        } else if fits {
            task
        } else {
            return Err(Error::InfeasibleConfig(format!(
                "task for image {} ({} samples) exceeds the memory cap",
                task.image, task.samples
            )));
        };
        loads[q] += placed.lat;
        peaks[q] = peaks[q].max(placed.mem);
        streams[q].push(placed);
    }

    let u: usize = streams.iter().map(Vec::len).sum();
    let m_unit = b.checked_div(u).map_or(b_min, |q| q.max(b_min));
    for t in streams.iter_mut().flatten() {
        t.mb = m_unit;
    }
    Ok(StreamSchedule { streams, loads, m_unit })
}
