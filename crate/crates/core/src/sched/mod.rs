//! Stream allocation and mini-batch scheduling.

mod alloc;
mod lpt;
mod tasks;

pub use alloc::allocate_streams;
pub use lpt::{lpt_schedule, StreamSchedule, Task};
pub use tasks::{build_tasks, ConstantPredictor, Mode, TileSizePredictor, WarmupStats};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Warm-up measurements: time `t[k]` of stage k for a batch of `b0`
/// samples, and per-sample memory `u[k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageProfile {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub b0: usize,
}

impl StageProfile {
    pub fn new(t: Vec<f64>, u: Vec<f64>, b0: usize) -> Result<Self> {
        let p = Self { t, u, b0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t.is_empty() || self.t.len() != self.u.len() {
            return invalid(format!("profile has {} times and {} memories", self.t.len(), self.u.len()));
        }
        if self.b0 == 0 {
            return invalid("baseline batch b0 must be at least 1");
        }
        if let Some(t) = self.t.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return invalid(format!("stage time {t} must be positive"));
        }
        if let Some(u) = self.u.iter().find(|u| !(u.is_finite() && **u >= 0.0)) {
            return invalid(format!("per-sample memory {u} must be non-negative"));
        }
        Ok(())
    }

    pub fn stages(&self) -> usize {
        self.t.len()
    }
}

/// Streams and mini-batch per stage, with the predicted bottleneck.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamPlan {
    pub s: Vec<usize>,
    pub m: Vec<usize>,
    pub j_star: f64,
    /// J* after initialization and after every accepted augmentation.
    #[serde(default)]
    pub history: Vec<f64>,
    /// Search-loop iterations, accepted or stalled.
    #[serde(default)]
    pub iterations: usize,
}

impl StreamPlan {
    /// One stream per stage at mini-batch `m`.
    pub fn single(stages: usize, m: usize, profile: &StageProfile) -> Self {
        let s = vec![1; stages];
        let m = vec![m; stages];
        let j_star = bottleneck(&s, &m, profile);
        Self { s, m, j_star, history: vec![j_star], iterations: 0 }
    }

    pub fn total_streams(&self) -> usize {
        self.s.iter().sum()
    }
}

/// t[k]·(m_k/b0)/s_k.
pub fn stage_time(k: usize, s_k: usize, m_k: usize, profile: &StageProfile) -> f64 {
    profile.t[k] * (m_k as f64 / profile.b0 as f64) / s_k as f64
}

/// Largest stage time.
pub fn bottleneck(s: &[usize], m: &[usize], profile: &StageProfile) -> f64 {
    (0..s.len())
        .map(|k| stage_time(k, s[k], m[k], profile))
        .fold(0.0, f64::max)
}

/// Σ_k s[k]·m[k]·u[k] ≤ M_cap.
pub fn mem_ok(s: &[usize], m: &[usize], u: &[f64], m_cap: f64) -> bool {
    let used: f64 = s.iter().zip(m).zip(u).map(|((&s, &m), &u)| s as f64 * m as f64 * u).sum();
    used <= m_cap
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_time_examples() {
        let p = StageProfile::new(vec![6.0, 12.0, 3.0], vec![0.0; 3], 16).unwrap();
        assert_eq!(stage_time(0, 1, 16, &p), 6.0);
        assert_eq!(stage_time(1, 2, 16, &p), 6.0);
        let s = [1, 2, 1];
        let m = [32, 32, 32];
        let times: Vec<f64> = (0..3).map(|k| stage_time(k, s[k], m[k], &p)).collect();
        assert_eq!(times, [12.0, 12.0, 6.0]);
        assert_eq!(bottleneck(&s, &m, &p), 12.0);
    }

    #[test]
    fn mem_ok_examples() {
        assert!(mem_ok(&[3, 3], &[100, 100], &[0.0, 0.0], 0.0));
        assert!(mem_ok(&[1, 1, 1], &[4, 4, 4], &[1.0, 2.0, 1.0], 16.0));
        assert!(!mem_ok(&[1, 1, 1], &[4, 4, 4], &[1.0, 2.0, 1.0], 15.0));
    }

    #[test]
    fn profile_validation() {
        assert!(StageProfile::new(vec![1.0], vec![0.0, 1.0], 1).is_err());
        assert!(StageProfile::new(vec![0.0], vec![0.0], 1).is_err());
        assert!(StageProfile::new(vec![1.0], vec![-1.0], 1).is_err());
        assert!(StageProfile::new(vec![1.0], vec![1.0], 0).is_err());
    }
}
