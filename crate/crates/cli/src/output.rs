//! Artifact writers. Every artifact is fully determined by its inputs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const METRICS_CSV: &str = "metrics.csv";
pub const METRICS_JSON: &str = "metrics.json";
pub const SATD_TIMELINE: &str = "satd_timeline.json";
pub const SATD_STATS: &str = "satd_stats.json";
pub const CORRELATIONS_CSV: &str = "correlations.csv";
pub const CORRELATIONS_JSON: &str = "correlations.json";
pub const HISTOGRAM: &str = "histogram.json";
pub const TIMELINES: &str = "timelines.json";
pub const SUMMARY: &str = "summary.json";
pub const VULNERABILITIES: &str = "vulnerabilities.json";

pub fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Writes `rows` under an explicit header, so an empty table still has one.
pub fn write_csv<T: Serialize>(dir: &Path, name: &str, header: &[&str], rows: &[T]) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&path)
        .with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(path)
}

/// `input` itself if it is a file, otherwise `input/name`.
pub fn resolve_file(input: &Path, name: &str) -> PathBuf {
    if input.is_dir() {
        input.join(name)
    } else {
        input.to_path_buf()
    }
}
