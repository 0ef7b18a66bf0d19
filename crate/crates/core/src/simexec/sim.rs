//! Discrete-event simulation of stream timelines on an integer-nanosecond
//! clock.
//!
//! Stage k consumes the global batch in chunks of `m[k]` samples. A chunk is
//! split evenly over `min(m[k], s[k])` streams. A chunk may start once the
//! upstream chunks holding its samples have finished. Every sub-batch is
//! launched through one serial host launcher costing `launch_ns`. Stage 0
//! may additionally wait on a host preparation region per chunk.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sched::{StageProfile, StreamPlan, StreamSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Start,
    End,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SimEvent {
    pub time: u64,
    pub stage: usize,
    pub stream: usize,
    pub batch: usize,
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub makespan: u64,
    /// Busy fraction of each stream, grouped by stage.
    pub utilization: Vec<Vec<f64>>,
    pub stage_busy: Vec<u64>,
    /// Idle stream-time per stage: streams·makespan − busy.
    pub stage_bubble: Vec<u64>,
    pub events: Vec<SimEvent>,
}

impl SimReport {
    /// Event trace as CSV with header `time,stream,stage,batch,kind`.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("time,stream,stage,batch,kind\n");
        for e in &self.events {
            let kind = match e.kind {
                EventKind::Start => "start",
                EventKind::End => "end",
            };
            s.push_str(&format!("{},{},{},{},{}\n", e.time, e.stream, e.stage, e.batch, kind));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Nanoseconds per profile time unit.
    pub unit_ns: u64,
    /// Host cost of launching one sub-batch.
    pub launch_ns: u64,
    /// Host preparation time per sample for stage-0 chunks.
    pub prep_ns_per_sample: u64,
    pub interleave: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { unit_ns: 1_000_000, launch_ns: 0, prep_ns_per_sample: 0, interleave: false }
    }
}

/// Per-sample integer cost of each stage.
pub fn per_sample_ns(profile: &StageProfile, unit_ns: u64) -> Vec<u64> {
    profile
        .t
        .iter()
        .map(|&t| (t * unit_ns as f64 / profile.b0 as f64).round().max(1.0) as u64)
        .collect()
}

fn report(makespan: u64, streams: &[usize], stream_busy: Vec<Vec<u64>>, mut events: Vec<SimEvent>) -> SimReport {
    events.sort();
    let stage_busy: Vec<u64> = stream_busy.iter().map(|v| v.iter().sum()).collect();
    let stage_bubble = streams
        .iter()
        .zip(&stage_busy)
        .map(|(&s, &b)| (s as u64 * makespan).saturating_sub(b))
        .collect();
    let utilization = stream_busy
        .iter()
        .map(|v| v.iter().map(|&b| if makespan == 0 { 0.0 } else { b as f64 / makespan as f64 }).collect())
        .collect();
    SimReport { makespan, utilization, stage_busy, stage_bubble, events }
}

/// Simulates one global batch of `b` samples under `plan`.
pub fn simulate(plan: &StreamPlan, profile: &StageProfile, b: usize, cfg: &SimConfig) -> Result<SimReport> {
    profile.validate()?;
    let k = profile.stages();
    if plan.s.len() != k || plan.m.len() != k {
        return Err(Error::InfeasibleConfig(format!("plan covers {} stages, profile has {k}", plan.s.len())));
    }
    if plan.s.contains(&0) || plan.m.contains(&0) {
        return Err(Error::InfeasibleConfig("every stage needs a stream and a positive mini-batch".into()));
    }
    if b == 0 {
        return Err(Error::InvalidInput("batch must be at least 1 sample".into()));
    }
    let cost = per_sample_ns(profile, cfg.unit_ns);
    let chunks: Vec<usize> = plan.m.iter().map(|&m| b.div_ceil(m)).collect();
    let range = |stage: usize, c: usize| (c * plan.m[stage], ((c + 1) * plan.m[stage]).min(b));

    // upstream chunks each downstream chunk waits on, and the latest end seen
    let mut pending: Vec<Vec<usize>> = (0..k).map(|st| vec![0; chunks[st]]).collect();
    let mut ready_at: Vec<Vec<u64>> = (0..k).map(|st| vec![0; chunks[st]]).collect();
    for st in 1..k {
        for c in 0..chunks[st] {
            let (lo, hi) = range(st, c);
            let m_up = plan.m[st - 1];
            pending[st][c] = (hi - 1) / m_up - lo / m_up + 1;
        }
    }

    let mut heap: BinaryHeap<Reverse<(u64, usize, usize)>> = BinaryHeap::new();
    let mut stream_free: Vec<Vec<u64>> = plan.s.iter().map(|&s| vec![0; s]).collect();
    let mut stream_busy: Vec<Vec<u64>> = plan.s.iter().map(|&s| vec![0; s]).collect();
    let mut launcher_free = 0u64;
    let mut events = Vec::new();
    let mut makespan = 0u64;

    let prep = |c: usize| cfg.prep_ns_per_sample * {
        let (lo, hi) = range(0, c);
        (hi - lo) as u64
    };
    if cfg.prep_ns_per_sample == 0 {
        for c in 0..chunks[0] {
            heap.push(Reverse((0, 0, c)));
        }
    } else {
        heap.push(Reverse((prep(0), 0, 0)));
    }
    let mut prep_end = if cfg.prep_ns_per_sample == 0 { 0 } else { prep(0) };

    while let Some(Reverse((t, st, c))) = heap.pop() {
        let (lo, hi) = range(st, c);
        let n = hi - lo;
        let parts = n.min(plan.s[st]);
        let mut first_start = u64::MAX;
        let mut chunk_end = 0;
        for j in 0..parts {
            let q = n / parts + usize::from(j < n % parts);
            let launch_start = launcher_free.max(t);
            launcher_free = launch_start + cfg.launch_ns;
            let start = launcher_free.max(stream_free[st][j]);
            let end = start + cost[st] * q as u64;
            stream_free[st][j] = end;
            stream_busy[st][j] += end - start;
            events.push(SimEvent { time: start, stage: st, stream: j, batch: c, kind: EventKind::Start });
            events.push(SimEvent { time: end, stage: st, stream: j, batch: c, kind: EventKind::End });
            first_start = first_start.min(start);
            chunk_end = chunk_end.max(end);
        }
        makespan = makespan.max(chunk_end);

        if st == 0 && cfg.prep_ns_per_sample > 0 && c + 1 < chunks[0] {
            let begin = if cfg.interleave { prep_end.max(first_start) } else { chunk_end };
            prep_end = begin + prep(c + 1);
            heap.push(Reverse((prep_end, 0, c + 1)));
        }
        if st + 1 < k {
            let nxt = st + 1;
            let m_dn = plan.m[nxt];
            for d in lo / m_dn..=(hi - 1) / m_dn {
                pending[nxt][d] -= 1;
                ready_at[nxt][d] = ready_at[nxt][d].max(chunk_end);
                if pending[nxt][d] == 0 {
                    heap.push(Reverse((ready_at[nxt][d], nxt, d)));
                }
            }
        }
    }
    Ok(report(makespan, &plan.s, stream_busy, events))
}

/// Executes each stream's task list back to back; task latency is in
/// profile time units.
pub fn simulate_schedule(schedule: &StreamSchedule, cfg: &SimConfig) -> SimReport {
    let mut busy = vec![vec![0u64; schedule.streams.len()]];
    let mut events = Vec::new();
    let mut makespan = 0;
    let mut launcher_free = 0u64;
    let mut free = vec![0u64; schedule.streams.len()];
    // launch in round-robin order of position so streams start together
    let depth = schedule.streams.iter().map(Vec::len).max().unwrap_or(0);
    let mut batch = 0;
    for pos in 0..depth {
        for (p, list) in schedule.streams.iter().enumerate() {
            let Some(task) = list.get(pos) else { continue };
            launcher_free += cfg.launch_ns;
            let start = launcher_free.max(free[p]);
            let end = start + (task.lat * cfg.unit_ns as f64).round() as u64;
            free[p] = end;
            busy[0][p] += end - start;
            events.push(SimEvent { time: start, stage: 0, stream: p, batch, kind: EventKind::Start });
            events.push(SimEvent { time: end, stage: 0, stream: p, batch, kind: EventKind::End });
            makespan = makespan.max(end);
            batch += 1;
        }
    }
    report(makespan, &[schedule.streams.len()], busy, events)
}

/// Host preparation and device kernel time of one batch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRegion {
    pub prep: u64,
    pub kernel: u64,
}

/// Single-stream timeline of consecutive batches. Without interleaving each
/// batch runs prep then kernel; with it, prep of batch k+1 may begin as soon
/// as kernel k starts.
pub fn simulate_regions(regions: &[BatchRegion], interleave: bool) -> SimReport {
    let mut events = Vec::new();
    let mut busy = [0u64; 2];
    let mut prep_end = 0u64;
    let mut kernel_end = 0u64;
    for (i, r) in regions.iter().enumerate() {
        let prep_start = if i == 0 {
            0
        } else if interleave {
            prep_end.max(kernel_end - regions[i - 1].kernel)
        } else {
            kernel_end
        };
        prep_end = prep_start + r.prep;
        let kernel_start = prep_end.max(kernel_end);
        kernel_end = kernel_start + r.kernel;
        busy[0] += r.prep;
        busy[1] += r.kernel;
        for (stage, s, e) in [(0, prep_start, prep_end), (1, kernel_start, kernel_end)] {
            events.push(SimEvent { time: s, stage, stream: 0, batch: i, kind: EventKind::Start });
            events.push(SimEvent { time: e, stage, stream: 0, batch: i, kind: EventKind::End });
        }
    }
    report(kernel_end.max(prep_end), &[1, 1], vec![vec![busy[0]], vec![busy[1]]], events)
}
