//! Detection, warm-up profiling and throughput benchmarks.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qrmark::detect::{DetectionConfig, DetectionRecord, Detector};
use qrmark::imaging::{preprocess, psnr, ImageBuffer};
use qrmark::rscodec::CodeParams;
use qrmark::sched::StreamPlan;
use qrmark::simexec::{bench_desk, warmup_profile, BenchRow, WallClock};
use qrmark::stegocodec::WatermarkKey;
use qrmark::synth::synth_corpus;
use qrmark::tiling::TileSpec;
use qrmark::Bits;
use serde::Serialize;
use serde_json::json;

use crate::args::{BenchArgs, CodecArgs, DetectArgs, DetectorArgs, ProfileArgs, Switch};
use crate::ingest::{file_stem, ingest, list_images, ItemError};
use crate::report::load_payload;
use crate::Outcome;

/// Code parameters, key and reference message for `c`.
pub fn codec_setup(c: &CodecArgs) -> Result<(CodeParams, WatermarkKey, Bits)> {
    let msg = Bits::parse(&c.msg, c.profile.fixed_payload_bits()).context("parsing --msg")?;
    let code = c.profile.params(msg.len())?;
    let key = WatermarkKey::new(c.key_seed, code.codeword_bits(), c.alpha)?;
    Ok((code, key, msg))
}

pub fn detection_config(c: &CodecArgs, d: Option<&DetectorArgs>, seed: u64) -> Result<DetectionConfig> {
    let (code, key, msg) = codec_setup(c)?;
    let mut cfg = DetectionConfig::new(code, key, msg);
    cfg.tile = TileSpec::new(c.tile_size, c.tile_strategy, seed);
    if let Some(d) = d {
        cfg.rs_workers = d.rs_workers;
        cfg.fpr_target = d.fpr;
        cfg.cache.enabled = d.cache == Switch::On;
        cfg.raw_fallback = !d.strict;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct ImageResult {
    file: String,
    #[serde(flatten)]
    record: DetectionRecord,
}

#[derive(Serialize)]
struct Aggregate {
    images: usize,
    verified: usize,
    bit_accuracy: Option<f64>,
    word_accuracy: Option<f64>,
    tpr: Option<f64>,
    mean_psnr: Option<f64>,
    psnr_pairs: usize,
}

/// Counts per power-of-two microsecond bucket; bucket i holds latencies
/// up to `bucket_upper_us[i]`.
#[derive(Serialize)]
struct LatencyHistogram {
    bucket_upper_us: Vec<u64>,
    preprocess: Vec<usize>,
    decode: Vec<usize>,
    correct: Vec<usize>,
}

fn histogram(records: &[DetectionRecord]) -> LatencyHistogram {
    let us = |ns: u64| ns.div_ceil(1000);
    let max = records
        .iter()
        .flat_map(|r| [r.latencies.preprocess, r.latencies.decode, r.latencies.correct])
        .map(us)
        .max()
        .unwrap_or(0);
    let mut upper = vec![1u64];
    while *upper.last().expect("nonempty") < max {
        upper.push(upper.last().expect("nonempty") * 2);
    }
    let count = |f: &dyn Fn(&DetectionRecord) -> u64| {
        let mut c = vec![0; upper.len()];
        for r in records {
            let v = us(f(r));
            c[upper.partition_point(|&u| u < v)] += 1;
        }
        c
    };
    LatencyHistogram {
        preprocess: count(&|r| r.latencies.preprocess),
        decode: count(&|r| r.latencies.decode),
        correct: count(&|r| r.latencies.correct),
        bucket_upper_us: upper,
    }
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Originals keyed by stem; attacked copies named `<stem>__<label>` match
/// their source.
fn psnr_against(dir: &Path, paths: &[PathBuf], images: &[ImageBuffer]) -> Result<Vec<f64>> {
    let originals: HashMap<String, PathBuf> = list_images(dir)?.into_iter().map(|p| (file_stem(&p), p)).collect();
    let mut out = Vec::new();
    for (p, img) in paths.iter().zip(images) {
        let stem = file_stem(p);
        let base = stem.split("__").next().unwrap_or(&stem);
        let Some(orig) = originals.get(&stem).or_else(|| originals.get(base)) else { continue };
        let Ok(orig) = qrmark::imaging::read_image(orig) else { continue };
        let reference = preprocess(&orig).to_u8();
        if let Ok(v) = psnr(&reference, img) {
            out.push(v);
        }
    }
    Ok(out)
}

pub fn detect(a: &DetectArgs, seed: u64, deterministic: bool) -> Result<Outcome> {
    let cfg = detection_config(&a.codec, Some(&a.detector), seed)?;
    let input = ingest(&a.input)?;
    let det = Detector::new(cfg.clone())?;
    let truths = vec![cfg.message.clone(); input.images.len()];
    let records = det.detect_batch(&input.images, Some(&truths), None)?;

    let n = records.len();
    let psnrs = match &a.originals {
        Some(dir) => psnr_against(dir, &input.paths, &input.images)?,
        None => Vec::new(),
    };
    let aggregate = Aggregate {
        images: n,
        verified: records.iter().filter(|r| r.verified).count(),
        bit_accuracy: mean(records.iter().filter_map(|r| r.bit_acc)),
        word_accuracy: mean(records.iter().filter_map(|r| r.word_match).map(|m| m as u8 as f64)),
        tpr: mean(records.iter().map(|r| r.verified as u8 as f64)),
        mean_psnr: mean(psnrs.iter().copied()),
        psnr_pairs: psnrs.len(),
    };
    let hist = (!deterministic).then(|| histogram(&records));
    let cache = match det.cache() {
        Some(c) if !deterministic => {
            let (hits, misses) = c.stats();
            Some(json!({ "hits": hits, "misses": misses, "entries": c.len() }))
        }
        _ => None,
    };
    let images: Vec<ImageResult> = input
        .paths
        .iter()
        .zip(records)
        .map(|(p, r)| ImageResult {
            file: p.display().to_string(),
            record: if deterministic { r.without_timing() } else { r },
        })
        .collect();
    eprintln!(
        "detected {n} images: {} verified, bit accuracy {}",
        aggregate.verified,
        aggregate.bit_accuracy.map_or("n/a".into(), |b| format!("{b:.4}"))
    );
    let failures = input.errors.len();
    let mut result = json!({
        "thresholds": { "message": det.thresholds().0, "codeword": det.thresholds().1 },
        "aggregate": aggregate,
        "records": images,
        "errors": input.errors,
    });
    if let Some(h) = hist {
        result["latency_histogram"] = serde_json::to_value(h)?;
    }
    if let Some(c) = cache {
        result["cache"] = c;
    }
    Ok(Outcome::new(result, failures))
}

pub fn profile(a: &ProfileArgs, seed: u64) -> Result<Outcome> {
    let cfg = detection_config(&a.codec, None, seed)?;
    let input = ingest(&a.input)?;
    if input.images.is_empty() {
        bail!("profiling needs at least one readable image");
    }
    let prof = warmup_profile(&input.images, a.warmup, &cfg, &WallClock)?;
    eprintln!("profiled {} images: t = {:?} ms", prof.b0, prof.t);
    Ok(Outcome::new(serde_json::to_value(prof)?, input.errors.len()))
}

fn baseline_plan() -> StreamPlan {
    StreamPlan { s: vec![1; 3], m: vec![1; 3], j_star: 0.0, history: Vec::new(), iterations: 0 }
}

fn write_csv(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    w.write_record(["label", "batch", "workers", "wall_ms", "latency_ms", "throughput"])?;
    for r in rows {
        let workers = r.workers.iter().map(ToString::to_string).collect::<Vec<_>>().join("x");
        w.write_record([
            r.label.clone(),
            r.batch.to_string(),
            workers,
            format!("{:.3}", r.wall_ms),
            format!("{:.4}", r.latency_ms),
            format!("{:.2}", r.throughput),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn bench(a: &BenchArgs, seed: u64, deterministic: bool) -> Result<Outcome> {
    if a.batch_sizes.is_empty() || a.batch_sizes.contains(&0) {
        bail!("batch sizes must be positive");
    }
    let cfg = detection_config(&a.codec, None, seed)?;
    let (images, errors): (Vec<ImageBuffer>, Vec<ItemError>) = match &a.input {
        Some(dir) => {
            let i = ingest(dir)?;
            (i.images, i.errors)
        }
        None => {
            let n = *a.batch_sizes.iter().max().expect("nonempty");
            (synth_corpus(seed, n, &[(256, 256)]), Vec::new())
        }
    };
    if images.is_empty() {
        bail!("benchmark needs at least one readable image");
    }
    let det = Detector::new(cfg)?;
    let mut rows = bench_desk("baseline", &baseline_plan(), &images, &det, &a.batch_sizes)?;
    if let Some(p) = &a.plan {
        let plan: StreamPlan = load_payload(p, "plan")?;
        rows.extend(bench_desk("plan", &plan, &images, &det, &a.batch_sizes)?);
    }
    if let Some(path) = &a.csv {
        write_csv(path, &rows)?;
    }
    let rows: Vec<_> = rows
        .iter()
        .map(|r| {
            if deterministic {
                json!({ "label": r.label, "batch": r.batch, "workers": r.workers })
            } else {
                serde_json::to_value(r).expect("plain data")
            }
        })
        .collect();
    Ok(Outcome::new(json!({ "rows": rows, "errors": errors }), errors.len()))
}
