//! Versioned report envelope and JSON payload loading.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::Cli;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch; absent in deterministic runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
    /// The resolved invocation, enough to re-run it.
    pub config: Cli,
    pub result: Value,
}

impl Report {
    pub fn new(config: &Cli, result: Value) -> Self {
        let created_unix = (!config.deterministic)
            .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
        Self {
            schema: SCHEMA,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix,
            config: config.clone(),
            result,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let report: Report = serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))?;
        if report.schema != SCHEMA {
            anyhow::bail!("{} has schema {}, expected {SCHEMA}", path.display(), report.schema);
        }
        Ok(report)
    }

    /// Pretty JSON to `path`, or stdout when absent.
    pub fn write(&self, path: Option<&Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        match path {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => Ok(std::io::stdout().lock().write_all(text.as_bytes())?),
        }
    }
}

/// Reads a `T` from a bare JSON document, or from a report's `result`
/// (optionally its `field` member).
pub fn load_payload<T: DeserializeOwned>(path: &Path, field: &str) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if v.get("schema").is_some() {
        if let Some(r) = v.get_mut("result") {
            v = r.take();
        }
    }
    if let Some(inner) = v.get_mut(field) {
        v = inner.take();
    }
    serde_json::from_value(v).with_context(|| format!("{} does not hold a {field}", path.display()))
}
