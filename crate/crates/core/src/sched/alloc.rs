//! Greedy stream allocation with mini-batch leveling.

use super::{bottleneck, mem_ok, stage_time, StageProfile, StreamPlan};
use crate::error::{Error, Result};

/// Allocates streams per stage under a stream budget `p` and memory cap.
///
/// Starts from one stream per stage at the largest uniform mini-batch that
/// fits memory (capped at `b`), then repeatedly adds the single stream that
/// most reduces the bottleneck while the reduction exceeds `eps`, giving up
/// after `tau_stall` consecutive non-improving rounds. Finally stages faster
/// than half the bottleneck double their mini-batch, up to `⌊B/Σs⌋`.
pub fn allocate_streams(
    profile: &StageProfile,
    b: usize,
    p: usize,
    m_cap: f64,
    eps: f64,
    tau_stall: usize,
) -> Result<StreamPlan> {
    profile.validate()?;
    let k = profile.stages();
    if b == 0 {
        return Err(Error::InvalidInput("global batch B must be at least 1".into()));
    }
    if p < k {
        return Err(Error::InfeasibleConfig(format!("stream budget {p} below stage count {k}")));
    }
    let u = &profile.u;

    // Step 1: largest uniform mini-batch that fits memory, at most B.
    let mut s = vec![1usize; k];
    let fits = |m: usize| mem_ok(&s, &vec![m; k], u, m_cap);
    if !fits(1) {
        return Err(Error::InfeasibleConfig(format!("one sample per stage exceeds M_cap = {m_cap}")));
    }
    let per_sample: f64 = u.iter().sum();
    let mut m0 = if per_sample > 0.0 { ((m_cap / per_sample).floor() as usize).clamp(1, b) } else { b };
    while m0 > 1 && !fits(m0) {
        m0 -= 1;
    }
    while m0 < b && fits(m0 + 1) {
        m0 += 1;
    }
    let mut m = vec![m0; k];
    let mut j_star = bottleneck(&s, &m, profile);
    let mut history = vec![j_star];

    // Step 2: greedy augmentation.
    let mut stall = 0;
    let mut iterations = 0;
    while stall < tau_stall {
        iterations += 1;
        let mut gain = 0.0;
        let mut best: Option<Vec<usize>> = None;
        let total: usize = s.iter().sum();
        for kk in 0..k {
            if total + 1 > p {
                break;
            }
            let mut cand = s.clone();
            cand[kk] += 1;
            if !mem_ok(&cand, &m, u, m_cap) {
                continue;
            }
            let delta = j_star - bottleneck(&cand, &m, profile);
            if delta > gain {
                gain = delta;
                best = Some(cand);
            }
        }
        match best {
            Some(cand) if gain > eps => {
                s = cand;
                j_star = bottleneck(&s, &m, profile);
                history.push(j_star);
                stall = 0;
            }
            _ => stall += 1,
        }
    }

    // Step 3: one leveling pass.
    let total: usize = s.iter().sum();
    let m_unit = (b / total).max(1);
    for kk in 0..k {
        if stage_time(kk, s[kk], m[kk], profile) < j_star / 2.0 {
            let mut cand = m.clone();
            cand[kk] = m_unit.min(2 * m[kk]);
            // leveling only grows mini-batches
            if cand[kk] > m[kk] && mem_ok(&s, &cand, u, m_cap) {
                m = cand;
            }
        }
    }
    let j_star = bottleneck(&s, &m, profile);

    Ok(StreamPlan { s, m, j_star, history, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(profile: &StageProfile, p: usize, m: usize) -> f64 {
        let k = profile.stages();
        let mut best = f64::INFINITY;
        let mut s = vec![1usize; k];
        loop {
            if s.iter().sum::<usize>() <= p {
                best = best.min(bottleneck(&s, &vec![m; k], profile));
            }
            let mut i = 0;
            loop {
                if i == k {
                    return best;
                }
                s[i] += 1;
                if s[i] <= p {
                    break;
                }
                s[i] = 1;
                i += 1;
            }
        }
    }

    #[test]
    fn single_stage_grows_to_budget() {
        let p = StageProfile::new(vec![5.0], vec![1.0], 1).unwrap();
        let plan = allocate_streams(&p, 4, 7, 1e9, 0.0, 2).unwrap();
        assert_eq!(plan.s, vec![7]);
        // memory bound: 4 samples per stream, 20 units -> 5 streams
        let plan = allocate_streams(&p, 4, 7, 20.0, 0.0, 2).unwrap();
        assert_eq!(plan.s, vec![5]);
    }

    #[test]
    fn streams_flow_to_slow_stage() {
        let p = StageProfile::new(vec![2.0, 8.0, 2.0], vec![1.0; 3], 1).unwrap();
        let plan = allocate_streams(&p, 32, 8, 1e6, 0.0, 3).unwrap();
        assert_eq!(plan.s, vec![1, 4, 1]);
        assert!((plan.j_star / 32.0 - brute_force(&p, 8, 1)).abs() < 1e-12);
    }

    #[test]
    fn history_is_non_increasing() {
        let p = StageProfile::new(vec![3.0, 7.0, 5.0], vec![1.0; 3], 4).unwrap();
        let plan = allocate_streams(&p, 16, 12, 1e6, 0.0, 2).unwrap();
        assert!(plan.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(plan.total_streams() <= 12);
        assert!(plan.iterations <= 12 * 3 + 2);
    }

    #[test]
    fn infeasible_cases() {
        let p = StageProfile::new(vec![1.0, 1.0], vec![10.0, 10.0], 1).unwrap();
        assert!(matches!(allocate_streams(&p, 8, 4, 19.0, 0.0, 1), Err(Error::InfeasibleConfig(_))));
        assert!(matches!(allocate_streams(&p, 8, 1, 1e6, 0.0, 1), Err(Error::InfeasibleConfig(_))));
    }

    #[test]
    fn leveling_doubles_fast_stages() {
        // memory caps the uniform start at m = 2; stage 0 is far faster
        let p = StageProfile::new(vec![1.0, 40.0], vec![0.1, 1.0], 1).unwrap();
        let plan = allocate_streams(&p, 64, 2, 2.3, 0.0, 1).unwrap();
        assert_eq!(plan.s, vec![1, 1]);
        assert_eq!(plan.m, vec![2, 2]);
        let plan = allocate_streams(&p, 64, 2, 2.5, 0.0, 1).unwrap();
        assert_eq!(plan.m, vec![4, 2]);
    }
}
