//! Simulated and threaded executors for stream plans and schedules.

mod bench;
mod desk;
mod sim;
mod warmup;

pub use bench::{bench_desk, synthetic_run, BenchRow, CostMode};
pub use desk::{run_desk, DeskReport};
pub use sim::{
    per_sample_ns, simulate, simulate_regions, simulate_schedule, BatchRegion, EventKind, SimConfig, SimEvent,
    SimReport,
};
pub use warmup::{stage_bytes, warmup_profile, StageTimer, WallClock};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::detect::{DetectionConfig, Detector};
    use crate::rscodec::CodeParams;
    use crate::sched::StreamPlan;
    use crate::stegocodec::WatermarkKey;
    use crate::synth::synth_corpus;

    struct Fixed([f64; 3]);

    impl StageTimer for Fixed {
        fn measure(&self, stage: usize, run: &mut dyn FnMut()) -> f64 {
            run();
            self.0[stage]
        }
    }

    fn cfg() -> DetectionConfig {
        DetectionConfig::new(
            CodeParams::gf16_15_12(),
            WatermarkKey::new(1, 60, 0.05).unwrap(),
            Bits::from_hex("00ff00ff00ff").unwrap(),
        )
    }

    #[test]
    fn fake_clock_profile_is_constant() {
        let imgs = synth_corpus(1, 3, &[(64, 64)]);
        let p = warmup_profile(&imgs, 3, &cfg(), &Fixed([2.0, 3.0, 5.0])).unwrap();
        assert_eq!(p.t, vec![2.0, 3.0, 5.0]);
        assert_eq!(p.b0, 3);
        assert!(p.u[0] >= 196_608.0);
        assert!(warmup_profile(&[], 3, &cfg(), &WallClock).is_err());
    }

    #[test]
    fn desk_single_image_matches_detect_one() {
        let imgs = synth_corpus(2, 1, &[(256, 256)]);
        let det = Detector::new(cfg()).unwrap();
        let plan = StreamPlan { s: vec![1, 2, 2], m: vec![4; 3], j_star: 0.0, history: vec![], iterations: 0 };
        let (recs, rep) = run_desk(&plan, &imgs, None, &det).unwrap();
        let one = crate::detect::detect_one(&imgs[0], &cfg()).unwrap();
        assert_eq!(recs[0].without_timing(), one.without_timing());
        assert_eq!(rep.workers, vec![1, 2, 2]);
    }

    #[test]
    fn synthetic_run_counts_items() {
        let p = crate::sched::StageProfile::new(vec![1.0, 1.0, 2.0], vec![0.0; 3], 1).unwrap();
        let row = synthetic_run(&p, [1, 1, 2], 8, std::time::Duration::from_micros(100), CostMode::Wait);
        assert_eq!(row.batch, 8);
        assert!(row.throughput > 0.0);
    }
}
