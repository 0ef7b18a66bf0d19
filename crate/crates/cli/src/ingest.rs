//! Image loading from a file or a directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qrmark::imaging::{read_image, ImageBuffer};
use serde::Serialize;

/// A file that could not be processed.
#[derive(Clone, Debug, Serialize)]
pub struct ItemError {
    pub file: String,
    pub error: String,
}

impl ItemError {
    pub fn new(path: &Path, error: impl ToString) -> Self {
        Self { file: path.display().to_string(), error: error.to_string() }
    }
}

#[derive(Debug, Default)]
pub struct Ingested {
    pub paths: Vec<PathBuf>,
    pub images: Vec<ImageBuffer>,
    pub errors: Vec<ItemError>,
}

fn is_image(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("ppm") || e.eq_ignore_ascii_case("png"))
}

/// Image files under `path` (or `path` itself), sorted by file name.
pub fn list_images(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    if !path.is_dir() {
        bail!("input {} does not exist", path.display());
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).with_context(|| format!("listing {}", path.display()))? {
        let p = entry?.path();
        if p.is_file() && is_image(&p) {
            files.push(p);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Loads every image; unreadable files become error entries.
pub fn ingest(path: &Path) -> Result<Ingested> {
    let mut out = Ingested::default();
    for p in list_images(path)? {
        match read_image(&p) {
            Ok(img) => {
                out.paths.push(p);
                out.images.push(img);
            }
            Err(e) => out.errors.push(ItemError::new(&p, e)),
        }
    }
    if out.images.is_empty() && out.errors.is_empty() {
        eprintln!("warning: no .ppm or .png images in {}", path.display());
    }
    for e in &out.errors {
        eprintln!("error: {}: {}", e.file, e.error);
    }
    Ok(out)
}

pub fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
