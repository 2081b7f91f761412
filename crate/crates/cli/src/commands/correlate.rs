//! Metrics + vulnerability reports → correlation table.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use tracing::{info, warn};
use verscan_core::stats::{
    correlation_matrix, parse_reports, totals_by_address, CorrelationMatrix, MetricsRow, VulnerabilityReport,
};
use verscan_core::Address;

use super::analyze::read_metrics_csv;
use crate::output::{resolve_file, write_csv, write_json, CORRELATIONS_CSV, CORRELATIONS_JSON, METRICS_CSV};
use crate::{Outcome, RunConfig};

pub const CORRELATIONS_HEADER: [&str; 7] = [
    "pair",
    "pearson",
    "spearman",
    "kendall_tau",
    "pearson_strength",
    "spearman_strength",
    "kendall_tau_strength",
];

#[derive(Serialize)]
struct Row {
    pair: String,
    pearson: String,
    spearman: String,
    kendall_tau: String,
    pearson_strength: String,
    spearman_strength: String,
    kendall_tau_strength: String,
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.5}"))
}

fn fmt_strength<S: Copy>(s: Option<S>, name: fn(S) -> &'static str) -> String {
    s.map_or("undefined", name).to_string()
}

pub fn read_reports(path: &Path) -> Result<Vec<VulnerabilityReport>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_reports(&text).with_context(|| format!("parsing {}", path.display()))
}

/// File-level metric rows keyed by address; later duplicates are dropped.
fn file_rows(path: &Path) -> Result<(Vec<MetricsRow>, usize)> {
    let mut seen = BTreeMap::new();
    let mut skipped = 0;
    for r in read_metrics_csv(path)?.into_iter().filter(|r| r.level == "file") {
        let Some(address) = r.address else {
            warn!(subject = %r.subject, "metrics row without an address cannot be joined");
            skipped += 1;
            continue;
        };
        if seen.contains_key(&address) {
            warn!(subject = %r.subject, address = %address, "duplicate metrics row for address ignored");
            skipped += 1;
            continue;
        }
        seen.insert(
            address,
            MetricsRow {
                address,
                sloc: r.sloc as f64,
                mccabe: r.mccabe as f64,
                halstead_volume: r.halstead_volume,
                maintainability_index: r.maintainability_index,
            },
        );
    }
    Ok((seen.into_values().collect(), skipped))
}

pub fn run(cfg: &RunConfig) -> Result<(CorrelationMatrix, Outcome)> {
    let metrics_path = resolve_file(&cfg.input, METRICS_CSV);
    let (rows, skipped) = file_rows(&metrics_path)?;
    let reports = read_reports(cfg.vulns_path()?)?;
    let totals: BTreeMap<Address, u64> = totals_by_address(&reports)?;
    let matrix = correlation_matrix(&rows, &totals).context("correlating metrics with vulnerabilities")?;
    let table: Vec<Row> = matrix
        .rows
        .iter()
        .map(|r| Row {
            pair: r.pair_label.clone(),
            pearson: fmt(r.pearson),
            spearman: fmt(r.spearman),
            kendall_tau: fmt(r.kendall_tau),
            pearson_strength: fmt_strength(r.strength.pearson, |s| s.as_str()),
            spearman_strength: fmt_strength(r.strength.spearman, |s| s.as_str()),
            kendall_tau_strength: fmt_strength(r.strength.kendall_tau, |s| s.as_str()),
        })
        .collect();
    write_csv(&cfg.output, CORRELATIONS_CSV, &CORRELATIONS_HEADER, &table)?;
    write_json(&cfg.output, CORRELATIONS_JSON, &matrix)?;
    if matrix.dropped > 0 {
        warn!(
            dropped = matrix.dropped,
            "metrics rows without a vulnerability report were dropped"
        );
    }
    info!(joined = matrix.joined, dropped = matrix.dropped, "correlate finished");
    Ok((matrix, Outcome::from_skipped(skipped)))
}
