mod common;

use common::{brute_force_alloc, brute_force_partition};
use proptest::prelude::*;
use qrmark::imaging::ImageBuffer;
use qrmark::sched::{
    allocate_streams, build_tasks, lpt_schedule, mem_ok, ConstantPredictor, Mode, StageProfile, Task, WarmupStats,
};

fn profile3() -> impl Strategy<Value = StageProfile> {
    (prop::collection::vec(0.1f64..20.0, 3), 1usize..64).prop_map(|(t, b0)| StageProfile::new(t, vec![1.0; 3], b0).unwrap())
}

fn unit_tasks(lats: &[f64]) -> Vec<Task> {
    lats.iter().enumerate().map(|(i, &l)| Task::new(i, 64, l, 1.0, 1)).collect()
}

proptest! {
    #[test]
    fn plans_respect_budget_and_memory(
        t in prop::collection::vec(0.1f64..20.0, 1..5),
        u in prop::collection::vec(0.0f64..4.0, 4),
        b in 1usize..512,
        extra in 0usize..8,
        m_cap in 10.0f64..2000.0,
        tau in 1usize..4,
    ) {
        let k = t.len();
        let prof = StageProfile::new(t, u[..k].to_vec(), 16).unwrap();
        let p = k + extra;
        if let Ok(plan) = allocate_streams(&prof, b, p, m_cap, 0.0, tau) {
            prop_assert!(plan.total_streams() <= p);
            prop_assert!(plan.s.iter().all(|&s| s >= 1));
            prop_assert!(mem_ok(&plan.s, &plan.m, &prof.u, m_cap));
            prop_assert!(plan.history.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(plan.iterations <= p * k + tau);
            prop_assert!(plan.m.iter().all(|&m| m >= 1 && m <= b));
            prop_assert_eq!(allocate_streams(&prof, b, p, m_cap, 0.0, tau).unwrap(), plan);
        }
    }

    #[test]
    fn greedy_within_bound_of_optimum(prof in profile3(), p in 3usize..=6, b in 1usize..256) {
        let plan = allocate_streams(&prof, b, p, 1e12, 0.0, 1).unwrap();
        let m0 = *plan.m.iter().min().unwrap();
        let opt = brute_force_alloc(&prof, p, m0);
        let greedy = *plan.history.last().unwrap();
        prop_assert!(greedy <= 1.25 * opt + 1e-12, "greedy {} opt {} plan {:?}", greedy, opt, plan);
        prop_assert!((plan.j_star - greedy).abs() <= 1e-12 * greedy);
    }

    #[test]
    fn lpt_within_graham_bound(lats in prop::collection::vec(1u32..50, 1..=10), p in 2usize..=3) {
        let lats: Vec<f64> = lats.into_iter().map(f64::from).collect();
        let s = lpt_schedule(&unit_tasks(&lats), p, f64::INFINITY, 1e12, 1, 64).unwrap();
        let opt = brute_force_partition(&lats, p);
        prop_assert!(s.makespan() <= (4.0 / 3.0 - 1.0 / (3.0 * p as f64)) * opt + 1e-9);
        prop_assert_eq!(s.task_count(), lats.len());
    }

    #[test]
    fn sharding_conserves_latency_and_memory(
        specs in prop::collection::vec((0.5f64..100.0, 0.1f64..10.0, 1usize..40), 1..12),
        p in 1usize..5,
        lambda in 0.0f64..0.5,
        b_min in 1usize..6,
    ) {
        let tasks: Vec<Task> = specs.iter().enumerate().map(|(i, &(l, m, n))| Task::new(i, 64, l, m, n)).collect();
        let s = lpt_schedule(&tasks, p, lambda, 1e12, b_min, 256).unwrap();
        let lat_in: f64 = tasks.iter().map(|t| t.lat).sum();
        let mem_in: f64 = tasks.iter().map(|t| t.mem).sum();
        let lat_out: f64 = s.streams.iter().flatten().map(|t| t.lat).sum();
        let mem_out: f64 = s.streams.iter().flatten().map(|t| t.mem).sum();
        prop_assert!((lat_in - lat_out).abs() <= 1e-9 * lat_in);
        prop_assert!((mem_in - mem_out).abs() <= 1e-9 * mem_in);
        for (q, list) in s.streams.iter().enumerate() {
            let load: f64 = list.iter().map(|t| t.lat).sum();
            prop_assert!((load - s.loads[q]).abs() <= 1e-9 * load.max(1.0));
        }
        for (i, t) in tasks.iter().enumerate() {
            let parts: Vec<&Task> = s.streams.iter().flatten().filter(|x| x.image == i).collect();
            prop_assert_eq!(parts.iter().map(|x| x.samples).sum::<usize>(), t.samples);
            if parts.len() > 1 {
                prop_assert!(parts.iter().all(|x| x.samples >= b_min));
            }
        }
        prop_assert_eq!(lpt_schedule(&tasks, p, lambda, 1e12, b_min, 256).unwrap(), s);
    }
}

#[test]
fn worked_lpt_example() {
    let lats = [8.0, 7.0, 6.0, 5.0, 4.0];
    let s = lpt_schedule(&unit_tasks(&lats), 2, f64::INFINITY, 1e9, 1, 64).unwrap();
    assert_eq!(s.makespan(), 17.0);
    assert_eq!(brute_force_partition(&lats, 2), 15.0);
}

#[test]
fn zero_slack_forces_sharding() {
    let tasks: Vec<Task> = [30.0, 10.0, 5.0].iter().enumerate().map(|(i, &l)| Task::new(i, 64, l, 1.0, 16)).collect();
    let s = lpt_schedule(&tasks, 2, 0.0, 1e9, 4, 64).unwrap();
    assert!(s.task_count() > 3);
    assert!((s.loads.iter().sum::<f64>() - 45.0).abs() < 1e-9);
}

#[test]
fn memory_infeasible_task_rejected() {
    let tasks = vec![Task::new(0, 64, 1.0, 50.0, 1)];
    assert!(lpt_schedule(&tasks, 2, f64::INFINITY, 10.0, 1, 64).is_err());
}

#[test]
fn build_tasks_reads_the_mode_table() {
    let d = StageProfile::new(vec![1.0, 1.0, 14.0], vec![4.0, 2.0, 1.0], 16).unwrap();
    let e = StageProfile::new(vec![3.0, 5.0], vec![1.0, 1.0], 16).unwrap();
    let stats = WarmupStats::new(64, d, e);
    let imgs = vec![ImageBuffer::filled(4, 4, 0); 2];
    let det = build_tasks(&imgs, &ConstantPredictor(64), &stats, Mode::Detect).unwrap();
    let emb = build_tasks(&imgs, &ConstantPredictor(64), &stats, Mode::Embed).unwrap();
    assert_eq!(det[0].lat, 1.0);
    assert_eq!(emb[0].lat, 0.5);
    let big = build_tasks(&imgs, &ConstantPredictor(128), &stats, Mode::Detect).unwrap();
    assert_eq!(big[1].lat, 4.0);
}
