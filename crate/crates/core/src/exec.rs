//! Three-stage worker-pool pipeline over bounded queues.
//!
//! Each stage runs its own pool; items carry their input index so the
//! collector can restore input order. Producers block when a queue is full.

use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::bounded;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    /// Summed time spent inside the stage function across workers.
    pub busy: Duration,
    pub items: usize,
    pub workers: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub stages: Vec<StageStats>,
    pub wall: Duration,
}

/// Runs `inputs` through `f0 → f1 → f2` with `workers[k]` threads on stage
/// k and queues of `queue_cap` items between stages. Outputs are returned in
/// input order.
pub fn run3<I, A, B, C, F0, F1, F2>(
    inputs: Vec<I>,
    workers: [usize; 3],
    queue_cap: usize,
    f0: F0,
    f1: F1,
    f2: F2,
) -> (Vec<C>, PipelineStats)
where
    I: Send,
    A: Send,
    B: Send,
    C: Send,
    F0: Fn(usize, I) -> A + Sync,
    F1: Fn(usize, A) -> B + Sync,
    F2: Fn(usize, B) -> C + Sync,
{
    let n = inputs.len();
    let cap = queue_cap.max(1);
    let workers = workers.map(|w| w.max(1));
    let start = Instant::now();
    let (tx_in, rx_in) = bounded::<(usize, I)>(cap);
    let (tx_a, rx_a) = bounded::<(usize, A)>(cap);
    let (tx_b, rx_b) = bounded::<(usize, B)>(cap);
    let (tx_c, rx_c) = bounded::<(usize, C)>(cap);

    let mut out: Vec<Option<C>> = (0..n).map(|_| None).collect();
    let mut busy = [Duration::ZERO; 3];
    let mut items = [0usize; 3];

    thread::scope(|s| {
        s.spawn(move || {
            for item in inputs.into_iter().enumerate() {
                if tx_in.send(item).is_err() {
                    break;
                }
            }
        });

        fn pool<'s, X: Send + 's, Y: Send + 's, F: Fn(usize, X) -> Y + Sync>(
            s: &'s thread::Scope<'s, '_>,
            count: usize,
            f: &'s F,
            rx: crossbeam_channel::Receiver<(usize, X)>,
            tx: crossbeam_channel::Sender<(usize, Y)>,
        ) -> Vec<thread::ScopedJoinHandle<'s, (Duration, usize)>> {
            (0..count)
                .map(|_| {
                    let (rx, tx) = (rx.clone(), tx.clone());
                    s.spawn(move || {
                        let mut busy = Duration::ZERO;
                        let mut done = 0;
                        for (i, x) in rx.iter() {
                            let t = Instant::now();
                            let y = f(i, x);
                            busy += t.elapsed();
                            done += 1;
                            if tx.send((i, y)).is_err() {
                                break;
                            }
                        }
                        (busy, done)
                    })
                })
                .collect()
        }

        let h0 = pool(s, workers[0], &f0, rx_in, tx_a);
        let h1 = pool(s, workers[1], &f1, rx_a, tx_b);
        let h2 = pool(s, workers[2], &f2, rx_b, tx_c);

        for (i, c) in rx_c.iter() {
            out[i] = Some(c);
        }
        for (k, hs) in [h0, h1, h2].into_iter().enumerate() {
            for h in hs {
                let (b, d) = h.join().expect("pipeline worker panicked");
                busy[k] += b;
                items[k] += d;
            }
        }
    });

    let stats = PipelineStats {
        stages: (0..3)
            .map(|k| StageStats { busy: busy[k], items: items[k], workers: workers[k] })
            .collect(),
        wall: start.elapsed(),
    };
    let out = out.into_iter().map(|c| c.expect("every item reaches the collector")).collect();
    (out, stats)
}
