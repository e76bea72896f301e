//! Artifact writers. All floats in CSV artifacts are written with 17
//! significant digits; JSON goes through serde_json, whose shortest-round-trip
//! float encoding is equally stable across runs.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

pub use softclip_core::record::format_float;

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create directory {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("JSON serialization failed")?;
    text.push('\n');
    write_text(path, &text)
}

/// Format an optional float, leaving the CSV field empty when absent.
pub fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}
