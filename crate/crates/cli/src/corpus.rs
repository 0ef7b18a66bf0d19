//! Commands that write images: synthetic corpora, watermarking and attacks.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Context, Result};
use qrmark::detect::watermark_image;
use qrmark::imaging::{apply_attack, preprocess, psnr, robustness_suite, write_ppm, ImageBuffer, SuiteEntry, TransformSpec};
use qrmark::stegocodec::SpreadSpectrum;
use qrmark::synth::synth_corpus;
use serde_json::json;

use crate::args::{AttackArgs, EmbedArgs, SynthArgs};
use crate::detect::codec_setup;
use crate::ingest::{file_stem, ingest, ItemError};
use crate::Outcome;

fn save(img: &ImageBuffer, path: &Path) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_ppm(img, &mut BufWriter::new(f))?;
    Ok(())
}

pub fn synth(a: &SynthArgs, seed: u64) -> Result<Outcome> {
    if a.width == 0 || a.height == 0 {
        bail!("image size must be positive");
    }
    fs::create_dir_all(&a.out)?;
    let mut files = Vec::new();
    for (i, img) in synth_corpus(seed, a.count, &[(a.width, a.height)]).iter().enumerate() {
        let p = a.out.join(format!("img_{i:04}.ppm"));
        save(img, &p)?;
        files.push(p.display().to_string());
    }
    eprintln!("wrote {} images to {}", files.len(), a.out.display());
    Ok(Outcome::ok(json!({ "files": files })))
}

pub fn embed(a: &EmbedArgs) -> Result<Outcome> {
    let (code, key, msg) = codec_setup(&a.codec)?;
    if a.codec.tile_size == 0 {
        bail!("tile size must be positive");
    }
    let to_dir = a.input.is_dir();
    let input = ingest(&a.input)?;
    if to_dir {
        fs::create_dir_all(&a.output)?;
    }
    let codec = SpreadSpectrum::new();
    let mut written = Vec::new();
    let mut errors = input.errors;
    for (src, img) in input.paths.iter().zip(&input.images) {
        let dst = if to_dir { a.output.join(format!("{}.ppm", file_stem(src))) } else { a.output.clone() };
        let res = watermark_image(img, &msg, &code, &key, a.codec.tile_size, &codec)
            .map_err(anyhow::Error::from)
            .and_then(|wm| {
                save(&wm, &dst)?;
                Ok(psnr(&preprocess(img).to_u8(), &wm)?)
            });
        match res {
            Ok(p) => written.push(json!({
                "input": src.display().to_string(),
                "output": dst.display().to_string(),
                "psnr": p,
            })),
            Err(e) => errors.push(ItemError::new(src, format!("{e:#}"))),
        }
    }
    eprintln!("watermarked {} images", written.len());
    let failures = errors.len();
    Ok(Outcome::new(
        json!({ "codeword_bits": code.codeword_bits(), "images": written, "errors": errors }),
        failures,
    ))
}

fn load_suite(path: &Path) -> Result<Vec<TransformSpec>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let entries: Vec<SuiteEntry> = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut specs = Vec::new();
    for e in &entries {
        specs.extend(e.expand()?);
    }
    Ok(specs)
}

pub fn attack(a: &AttackArgs, seed: u64) -> Result<Outcome> {
    let suite = match &a.suite {
        Some(p) => load_suite(p)?,
        None => robustness_suite(),
    };
    let input = ingest(&a.input)?;
    fs::create_dir_all(&a.output)?;
    let mut written = Vec::new();
    let mut errors = input.errors;
    for (src, img) in input.paths.iter().zip(&input.images) {
        for spec in &suite {
            let dst = a.output.join(format!("{}__{}.ppm", file_stem(src), spec.label()));
            let res = apply_attack(img, spec, seed).map_err(anyhow::Error::from).and_then(|out| save(&out, &dst));
            match res {
                Ok(()) => written.push(json!({
                    "input": src.display().to_string(),
                    "attack": spec,
                    "label": spec.label(),
                    "output": dst.display().to_string(),
                })),
                Err(e) => errors.push(ItemError::new(src, format!("{}: {e:#}", spec.label()))),
            }
        }
    }
    eprintln!("wrote {} attacked images", written.len());
    let failures = errors.len();
    Ok(Outcome::new(json!({ "outputs": written, "errors": errors }), failures))
}
