//! Store (+ optional vulnerability reports) → summary artifacts.

use std::collections::BTreeMap;

use anyhow::Result;
use serde::Serialize;
use tracing::{info, warn};
use verscan_core::satd::DebtStats;
use verscan_core::stats::{totals_by_address, version_histogram, VersionHistogram, VulnerabilityTimeline};
use verscan_core::store::{DatasetLayout, Manifest};

use super::correlate::read_reports;
use super::satd::{stats_or_empty, timelines};
use crate::output::{write_json, HISTOGRAM, SUMMARY, TIMELINES};
use crate::{Outcome, RunConfig};

#[derive(Debug, Serialize)]
pub struct Summary {
    pub families: usize,
    pub versions: usize,
    pub manifest: Option<Manifest>,
    pub histogram: VersionHistogram,
    pub debt: DebtStats,
    /// Families with at least one analysed version, when reports were given.
    pub families_with_vulnerability_data: usize,
    pub families_with_vulnerability_change: usize,
}

pub fn run(cfg: &RunConfig) -> Result<(Summary, Outcome)> {
    let layout = DatasetLayout::new(&cfg.input);
    let scan = layout.read_families()?;
    for d in &scan.diagnostics {
        warn!(diagnostic = %d, "store entry skipped");
    }
    let counts: Vec<usize> = scan.families.iter().map(|f| f.versions.len()).collect();
    let histogram = version_histogram::<f64>(&counts);

    let vuln_timelines: Vec<VulnerabilityTimeline> = match &cfg.vulns {
        None => Vec::new(),
        Some(path) => {
            let totals: BTreeMap<_, _> = totals_by_address(&read_reports(path)?)?;
            scan.families
                .iter()
                .map(|f| {
                    let versions: Vec<_> = f.versions.iter().map(|v| (v.version_index, v.address)).collect();
                    verscan_core::stats::vulnerability_timeline(f.identity.clone(), &versions, &totals)
                })
                .collect()
        }
    };

    let (debt_timelines, _, skipped) = timelines(&layout, &cfg.keyword_list()?)?;
    let summary = Summary {
        families: scan.families.len(),
        versions: counts.iter().sum(),
        manifest: layout.read_manifest().ok(),
        histogram: histogram.clone(),
        debt: stats_or_empty(&debt_timelines)?,
        families_with_vulnerability_data: vuln_timelines.iter().filter(|t| !t.totals.is_empty()).count(),
        families_with_vulnerability_change: vuln_timelines.iter().filter(|t| t.changed).count(),
    };
    write_json(&cfg.output, HISTOGRAM, &histogram)?;
    write_json(&cfg.output, TIMELINES, &vuln_timelines)?;
    write_json(&cfg.output, SUMMARY, &summary)?;
    info!(
        families = summary.families,
        versions = summary.versions,
        "report finished"
    );
    Ok((summary, Outcome::from_skipped(skipped + scan.diagnostics.len())))
}
