//! Slither `--json` outputs → vulnerability report file.

use anyhow::{bail, Context, Result};
use serde_json::Value;
use tracing::{info, warn};
use verscan_core::stats::{from_slither, VulnerabilityReport};

use super::analyze::identify;
use super::files_with_extension;
use crate::output::{write_json, VULNERABILITIES};
use crate::{Outcome, RunConfig};

/// Contract name from `<address>_<name>[_V<n>].json`.
fn contract_name(stem: &str) -> Option<String> {
    let rest = stem.get(43..)?;
    let name = match rest.rsplit_once("_V") {
        Some((n, idx)) if !idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit()) => n,
        _ => rest,
    };
    (!name.is_empty()).then(|| name.to_string())
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let files = files_with_extension(&cfg.input, "json")?;
    let mut reports: Vec<VulnerabilityReport> = Vec::new();
    let mut skipped = 0;
    for path in &files {
        let file_name = path.file_name().unwrap_or_default().to_string_lossy();
        let stem = file_name.trim_end_matches(".json");
        let sol_name = format!("{stem}.sol");
        let (Some(address), Some(name)) = (identify(&sol_name).0, contract_name(stem)) else {
            warn!(file = %file_name, "file name does not start with <address>_<name>");
            skipped += 1;
            continue;
        };
        let parsed = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .and_then(|t| serde_json::from_str::<Value>(&t).context("invalid JSON"))
            .and_then(|v| from_slither(&v, address, &name, None).map_err(Into::into));
        match parsed {
            Ok(r) => reports.push(r),
            Err(e) => {
                warn!(file = %file_name, error = %format!("{e:#}"), "report skipped");
                skipped += 1;
            }
        }
    }
    reports.sort_by_key(|r| r.address);
    if let Some(w) = reports.windows(2).find(|w| w[0].address == w[1].address) {
        bail!("two Slither reports for {}", w[0].address);
    }
    write_json(&cfg.output, VULNERABILITIES, &reports)?;
    info!(reports = reports.len(), skipped, "slither reports ingested");
    if !files.is_empty() && skipped == files.len() {
        bail!("no Slither report could be read");
    }
    Ok(Outcome::from_skipped(skipped))
}
