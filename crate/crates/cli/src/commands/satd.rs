//! Stored families → technical-debt timelines and statistics.

use anyhow::{bail, Result};
use tracing::{info, warn};
use verscan_core::satd::{debt_stats, scan_source, track_evolution, DebtStats, DebtTimeline, KeywordList, SatdError};
use verscan_core::store::{DatasetLayout, StoredFamily};

use crate::output::{write_json, SATD_STATS, SATD_TIMELINE};
use crate::{Outcome, RunConfig};

fn family_timeline(fam: &StoredFamily, keywords: &KeywordList) -> Result<DebtTimeline> {
    let mut versions = Vec::with_capacity(fam.versions.len());
    for v in &fam.versions {
        let source = v.read_source()?;
        versions.push(scan_source(v.version_index, &source, keywords)?);
    }
    Ok(track_evolution(fam.identity.clone(), &versions))
}

/// Timelines of every stored family; families with an unreadable version
/// are skipped.
pub fn timelines(layout: &DatasetLayout, keywords: &KeywordList) -> Result<(Vec<DebtTimeline>, usize, usize)> {
    let scan = layout.read_families()?;
    for d in &scan.diagnostics {
        warn!(diagnostic = %d, "store entry skipped");
    }
    let total = scan.families.len();
    let mut out = Vec::with_capacity(total);
    let mut skipped = 0;
    for fam in &scan.families {
        match family_timeline(fam, keywords) {
            Ok(t) => out.push(t),
            Err(e) => {
                warn!(name = %fam.identity.name, deployer = %fam.identity.deployer, error = %format!("{e:#}"), "family skipped");
                skipped += 1;
            }
        }
    }
    Ok((out, total, skipped))
}

/// Statistics, or an all-zero record flagged undefined for an empty store.
pub fn stats_or_empty(timelines: &[DebtTimeline]) -> Result<DebtStats> {
    match debt_stats(timelines) {
        Ok(s) => Ok(s),
        Err(SatdError::EmptyInput) => Ok(DebtStats {
            families: 0,
            mean_initial_debt: 0.0,
            median_initial_debt: 0.0,
            pct_with_removal: 0.0,
            families_with_initial_debt: 0,
            families_with_removal: 0,
            removal_undefined: true,
        }),
        Err(e) => Err(e.into()),
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let keywords = cfg.keyword_list()?;
    let layout = DatasetLayout::new(&cfg.input);
    let (timelines, total, skipped) = timelines(&layout, &keywords)?;
    let stats = stats_or_empty(&timelines)?;
    write_json(&cfg.output, SATD_TIMELINE, &timelines)?;
    write_json(&cfg.output, SATD_STATS, &stats)?;
    info!(
        families = total,
        skipped,
        mean_initial_debt = stats.mean_initial_debt,
        pct_with_removal = stats.pct_with_removal,
        "satd finished"
    );
    if total > 0 && skipped == total {
        bail!("no family could be scanned");
    }
    Ok(Outcome::from_skipped(skipped))
}
