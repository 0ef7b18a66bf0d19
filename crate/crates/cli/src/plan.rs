//! Stream allocation, task placement and timeline simulation.

use std::fs;

use anyhow::{bail, Context, Result};
use qrmark::sched::{allocate_streams, lpt_schedule, Mode, StageProfile, StreamPlan, Task, WarmupStats};
use qrmark::simexec::{simulate, SimConfig};
use serde_json::json;

use crate::args::{PlanKnobs, ScheduleArgs, SimulateArgs};
use crate::report::load_payload;
use crate::Outcome;

fn check_knobs(k: &PlanKnobs) -> Result<()> {
    if k.batch == 0 {
        bail!("--batch must be at least 1");
    }
    if k.streams == 0 {
        bail!("--streams must be at least 1");
    }
    if !(k.mem_cap.is_finite() && k.mem_cap > 0.0) {
        bail!("--mem-cap must be positive");
    }
    if !(k.eps.is_finite() && k.eps >= 0.0) {
        bail!("--eps must be non-negative");
    }
    if k.tau_stall == 0 {
        bail!("--tau-stall must be at least 1");
    }
    Ok(())
}

pub fn schedule(a: &ScheduleArgs) -> Result<Outcome> {
    check_knobs(&a.knobs)?;
    if a.b_min == 0 {
        bail!("--b-min must be at least 1");
    }
    if !a.lambda.is_finite() {
        bail!("--lambda must be finite; pass a negative value to disable balancing");
    }
    let profile: StageProfile = load_payload(&a.profile, "profile")?;
    profile.validate()?;
    let k = &a.knobs;
    let plan = allocate_streams(&profile, k.batch, k.streams, k.mem_cap, k.eps, k.tau_stall)?;
    eprintln!("plan s = {:?}, m = {:?}, J* = {:.4}", plan.s, plan.m, plan.j_star);

    let schedule = if a.tasks > 0 {
        if a.tile_sizes.is_empty() || a.tile_sizes.contains(&0) {
            bail!("tile sizes must be positive");
        }
        let stats = WarmupStats::new(a.reference_tile, profile.clone(), profile.clone());
        let tasks = (0..a.tasks)
            .map(|i| {
                let tile = a.tile_sizes[i % a.tile_sizes.len()];
                let (lat, mem) = stats.predict(tile, Mode::Detect)?;
                Ok(Task::new(i, tile, lat, mem, 1))
            })
            .collect::<Result<Vec<_>>>()?;
        let lambda = if a.lambda < 0.0 { f64::INFINITY } else { a.lambda };
        let s = lpt_schedule(&tasks, k.streams, lambda, k.mem_cap, a.b_min, k.batch)?;
        eprintln!("placed {} tasks on {} streams, makespan {:.4}", s.task_count(), s.streams.len(), s.makespan());
        Some(s)
    } else {
        None
    };
    let mut result = json!({ "profile": profile, "plan": plan });
    if let Some(s) = schedule {
        result["schedule"] = json!({ "makespan": s.makespan(), "streams": s });
    }
    Ok(Outcome::ok(result))
}

pub fn simulate_cmd(a: &SimulateArgs) -> Result<Outcome> {
    let plan: StreamPlan = load_payload(&a.plan, "plan")?;
    let profile: StageProfile = load_payload(&a.profile, "profile")?;
    if a.unit_ns == 0 {
        bail!("--unit-ns must be at least 1");
    }
    let cfg = SimConfig { unit_ns: a.unit_ns, launch_ns: a.launch_ns, prep_ns_per_sample: a.prep_ns, interleave: a.interleave };
    let rep = simulate(&plan, &profile, a.batch, &cfg)?;
    if let Some(path) = &a.trace {
        fs::write(path, rep.trace_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!("makespan {} ns over {} events", rep.makespan, rep.events.len());
    Ok(Outcome::ok(json!({
        "plan": plan,
        "sim": {
            "makespan_ns": rep.makespan,
            "utilization": rep.utilization,
            "stage_busy_ns": rep.stage_busy,
            "stage_bubble_ns": rep.stage_bubble,
            "events": rep.events.len(),
        },
    })))
}
