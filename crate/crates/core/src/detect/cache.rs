//! Codebook memoizing raw bits → correction result, with staleness-based
//! eviction.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::rscodec::{bw_decode, CodeParams, DecodeResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheConfig {
    pub enabled: bool,
    pub capacity: usize,
    /// Entries not accessed for more than this many processed images are
    /// dropped.
    pub stale_after: u64,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self { enabled: true, capacity: 4096, stale_after: 10_000 }
    }
}

type Outcome = std::result::Result<DecodeResult, String>;

struct Entry {
    outcome: Outcome,
    last_access: u64,
}

pub struct Codebook {
    cfg: CacheConfig,
    clock: AtomicU64,
    map: Mutex<HashMap<Bits, Entry>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl Codebook {
    pub fn new(cfg: CacheConfig) -> Result<Self> {
        if cfg.capacity == 0 {
            return Err(Error::InvalidInput("cache capacity must be at least 1".into()));
        }
        Ok(Self {
            cfg,
            clock: AtomicU64::new(0),
            map: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    /// Looks up `raw`, decoding and inserting on a miss. Each call counts as
    /// one processed image.
    pub fn correct(&self, raw: &Bits, params: &CodeParams) -> (Result<DecodeResult>, bool) {
        let now = self.clock.fetch_add(1, Ordering::SeqCst) + 1;
        {
            let mut map = self.map.lock().expect("codebook poisoned");
            if let Some(e) = map.get_mut(raw) {
                if now - e.last_access <= self.cfg.stale_after {
                    e.last_access = now;
                    self.hits.fetch_add(1, Ordering::Relaxed);
                    return (e.outcome.clone().map_err(Error::DecodeFailure), true);
                }
                map.remove(raw);
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let outcome: Outcome = match bw_decode(raw, params) {
            Ok(d) => Ok(d),
            Err(Error::DecodeFailure(m)) => Err(m),
            Err(e) => return (Err(e), false),
        };
        let mut map = self.map.lock().expect("codebook poisoned");
        let stale = self.cfg.stale_after;
        map.retain(|_, e| now.saturating_sub(e.last_access) <= stale);
        while map.len() >= self.cfg.capacity {
            let oldest = map
                .iter()
                .min_by(|a, b| a.1.last_access.cmp(&b.1.last_access).then_with(|| a.0.cmp(b.0)))
                .map(|(k, _)| k.clone())
                .expect("non-empty");
            map.remove(&oldest);
        }
        map.insert(raw.clone(), Entry { outcome: outcome.clone(), last_access: now });
        (outcome.map_err(Error::DecodeFailure), false)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("codebook poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (hits, misses) so far.
    pub fn stats(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }
}

/// Decodes through the cache when one is given; the flag reports a hit.
pub fn correct_with_cache(raw: &Bits, cache: Option<&Codebook>, params: &CodeParams) -> (Result<DecodeResult>, bool) {
    match cache {
        Some(c) => c.correct(raw, params),
        None => (bw_decode(raw, params), false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rscodec::rs_encode;

    fn word(v: u64) -> Bits {
        let p = CodeParams::gf16_15_12();
        let m = Bits::from_hex(&format!("{v:012x}")).unwrap();
        rs_encode(&m, &p).unwrap().into_bits()
    }

    #[test]
    fn second_lookup_hits() {
        let p = CodeParams::gf16_15_12();
        let cb = Codebook::new(CacheConfig::default()).unwrap();
        let w = word(42);
        let (a, h1) = cb.correct(&w, &p);
        let (b, h2) = cb.correct(&w, &p);
        assert!(!h1 && h2);
        assert_eq!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn capacity_one_alternating_always_misses() {
        let p = CodeParams::gf16_15_12();
        let cb = Codebook::new(CacheConfig { enabled: true, capacity: 1, stale_after: 100 }).unwrap();
        let (a, b) = (word(1), word(2));
        for i in 0..10 {
            let w = if i % 2 == 0 { &a } else { &b };
            assert!(!cb.correct(w, &p).1);
        }
        assert_eq!(cb.len(), 1);
    }

    #[test]
    fn stale_entries_expire() {
        let p = CodeParams::gf16_15_12();
        let cb = Codebook::new(CacheConfig { enabled: true, capacity: 8, stale_after: 2 }).unwrap();
        let (a, b) = (word(1), word(2));
        let _ = cb.correct(&a, &p);
        let _ = cb.correct(&b, &p);
        let _ = cb.correct(&b, &p);
        // a was last touched three images ago
        assert!(!cb.correct(&a, &p).1);
    }

    #[test]
    fn failures_are_memoized() {
        let p = CodeParams::gf16_15_12();
        let cb = Codebook::new(CacheConfig::default()).unwrap();
        let mut w = word(7);
        for s in [0, 5, 10] {
            w.flip(s * 4);
        }
        let (first, _) = cb.correct(&w, &p);
        let (second, hit) = cb.correct(&w, &p);
        assert!(hit);
        assert_eq!(first.is_err(), second.is_err());
        assert!(Codebook::new(CacheConfig { enabled: true, capacity: 0, stale_after: 1 }).is_err());
    }
}
