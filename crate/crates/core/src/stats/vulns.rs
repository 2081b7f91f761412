//! Ingested vulnerability-detector findings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::StatsError;
use crate::primitives::Address;

fn unit_weight() -> u64 {
    1
}

fn is_unit(w: &u64) -> bool {
    *w == 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub detector_id: String,
    pub severity: String,
    pub count: u64,
    /// Threat weight of this finding type. Only unit weights are accepted.
    #[serde(default = "unit_weight", skip_serializing_if = "is_unit")]
    pub weight: u64,
}

impl Finding {
    pub fn new(detector_id: impl Into<String>, severity: impl Into<String>, count: u64) -> Self {
        Finding {
            detector_id: detector_id.into(),
            severity: severity.into(),
            count,
            weight: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnerabilityReport {
    pub address: Address,
    pub name: String,
    #[serde(default)]
    pub deployer: Option<Address>,
    pub findings: Vec<Finding>,
}

impl VulnerabilityReport {
    pub fn total(&self) -> u64 {
        aggregate_vulnerabilities(&self.findings)
    }
}

/// Total number of vulnerabilities, every detector type weighted equally.
pub fn aggregate_vulnerabilities(findings: &[Finding]) -> u64 {
    findings.iter().map(|f| f.count).sum()
}

/// Parses a JSON array of reports.
pub fn parse_reports(text: &str) -> Result<Vec<VulnerabilityReport>, StatsError> {
    let reports: Vec<VulnerabilityReport> =
        serde_json::from_str(text).map_err(|e| StatsError::Report(e.to_string()))?;
    for r in &reports {
        if let Some(f) = r.findings.iter().find(|f| f.weight != 1) {
            return Err(StatsError::Report(format!(
                "{}: finding {} has weight {}; only unit weights are supported",
                r.address, f.detector_id, f.weight
            )));
        }
    }
    Ok(reports)
}

/// Vulnerability totals keyed by contract address.
pub fn totals_by_address(reports: &[VulnerabilityReport]) -> Result<BTreeMap<Address, u64>, StatsError> {
    let mut out = BTreeMap::new();
    for r in reports {
        if out.insert(r.address, r.total()).is_some() {
            return Err(StatsError::Report(format!("duplicate report for {}", r.address)));
        }
    }
    Ok(out)
}

/// Converts Slither's `--json` output: each `results.detectors[]` element is
/// one finding, grouped by check and impact.
pub fn from_slither(
    report: &Value,
    address: Address,
    name: &str,
    deployer: Option<Address>,
) -> Result<VulnerabilityReport, StatsError> {
    let detectors = match report.pointer("/results/detectors") {
        Some(Value::Array(d)) => d.as_slice(),
        Some(_) => return Err(StatsError::Report("results.detectors is not an array".into())),
        None if report.get("results").is_some() => &[],
        None => return Err(StatsError::Report("missing results object".into())),
    };
    let mut grouped: BTreeMap<(String, String), u64> = BTreeMap::new();
    for d in detectors {
        let check = d
            .get("check")
            .and_then(Value::as_str)
            .ok_or_else(|| StatsError::Report("detector result without check".into()))?;
        let impact = d.get("impact").and_then(Value::as_str).unwrap_or("Unknown");
        *grouped.entry((check.to_string(), impact.to_string())).or_default() += 1;
    }
    Ok(VulnerabilityReport {
        address,
        name: name.to_string(),
        deployer,
        findings: grouped
            .into_iter()
            .map(|((id, sev), count)| Finding::new(id, sev, count))
            .collect(),
    })
}
