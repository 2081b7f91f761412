//! Source files → code metrics.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tracing::{info, warn};
use verscan_core::metrics::{analyze, Level};
use verscan_core::store::{parse_sanctuary_name, parse_version_file_name};
use verscan_core::Address;

use super::{files_with_extension, relative_name};
use crate::output::{write_csv, write_json, METRICS_CSV, METRICS_JSON};
use crate::{Outcome, RunConfig};

pub const METRICS_HEADER: [&str; 8] = [
    "subject",
    "address",
    "version",
    "level",
    "sloc",
    "mccabe",
    "halstead_volume",
    "maintainability_index",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub subject: String,
    pub address: Option<Address>,
    pub version: Option<u32>,
    pub level: String,
    pub sloc: usize,
    pub mccabe: usize,
    pub halstead_volume: f64,
    pub maintainability_index: f64,
}

/// Address and version index encoded in a stored or Sanctuary file name.
pub fn identify(file_name: &str) -> (Option<Address>, Option<u32>) {
    if let Ok((a, _, v)) = parse_version_file_name(file_name) {
        return (Some(a), Some(v));
    }
    match parse_sanctuary_name(file_name) {
        Ok((a, _)) => (Some(a), None),
        Err(_) => (None, None),
    }
}

pub fn metrics_for_tree(root: &Path, level: Level) -> Result<(Vec<MetricsRow>, usize, usize)> {
    let files = files_with_extension(root, "sol")?;
    let mut rows = Vec::new();
    let mut skipped = 0;
    for path in &files {
        let subject = relative_name(root, path);
        let source = match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                warn!(file = %subject, error = %e, "unreadable source skipped");
                skipped += 1;
                continue;
            }
        };
        let analysis = match analyze::<f64>(&subject, &source, level) {
            Ok(a) => a,
            Err(e) => {
                warn!(file = %subject, error = %e, "source skipped");
                skipped += 1;
                continue;
            }
        };
        for d in &analysis.diagnostics {
            warn!(file = %subject, diagnostic = %d, "lexer diagnostic");
        }
        let (address, version) = identify(&path.file_name().unwrap_or_default().to_string_lossy());
        rows.extend(analysis.records.into_iter().map(|r| MetricsRow {
            subject: r.subject,
            address,
            version,
            level: r.level.to_string(),
            sloc: r.sloc,
            mccabe: r.mccabe,
            halstead_volume: r.halstead_volume,
            maintainability_index: r.maintainability_index,
        }));
    }
    Ok((rows, files.len(), skipped))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize()
        .collect::<Result<Vec<MetricsRow>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    if !cfg.input.exists() {
        bail!("input {} does not exist", cfg.input.display());
    }
    let (rows, files, skipped) = metrics_for_tree(&cfg.input, cfg.level)?;
    write_csv(&cfg.output, METRICS_CSV, &METRICS_HEADER, &rows)?;
    write_json(&cfg.output, METRICS_JSON, &rows)?;
    info!(files, records = rows.len(), skipped, level = %cfg.level, "analyze finished");
    if files > 0 && skipped == files {
        bail!("no source file could be analysed");
    }
    Ok(Outcome::from_skipped(skipped))
}
