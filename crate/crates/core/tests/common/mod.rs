//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use qrmark::sched::{bottleneck, StageProfile};

/// Carry-less shift-and-XOR multiplication reduced by `poly`.
pub fn gf_mul_slow(a: u16, b: u16, m: u32, poly: u32) -> u16 {
    let (mut a, mut b) = (a as u32, b as u32);
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << m) != 0 {
            a ^= poly;
        }
    }
    acc as u16
}

/// Smallest bottleneck over every allocation with `s[k] ≥ 1`, `Σ s ≤ p`,
/// at uniform mini-batch `m`.
pub fn brute_force_alloc(profile: &StageProfile, p: usize, m: usize) -> f64 {
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

/// Optimal makespan of indivisible jobs on `p` machines by enumeration.
pub fn brute_force_partition(jobs: &[f64], p: usize) -> f64 {
    fn go(i: usize, jobs: &[f64], loads: &mut Vec<f64>, best: &mut f64) {
        let cur = loads.iter().copied().fold(0.0, f64::max);
        if cur >= *best {
            return;
        }
        if i == jobs.len() {
            *best = cur;
            return;
        }
        for q in 0..loads.len() {
            // machines with equal load are interchangeable
            if loads[..q].contains(&loads[q]) {
                continue;
            }
            loads[q] += jobs[i];
            go(i + 1, jobs, loads, best);
            loads[q] -= jobs[i];
        }
    }
    let mut best = f64::INFINITY;
    go(0, jobs, &mut vec![0.0; p], &mut best);
    best
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &t in &idx[i..=j] {
                r[t] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
