//! Correlations between code metrics and vulnerability totals, per-family
//! vulnerability timelines and version-count histograms.

pub mod correlation;
pub mod vulns;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linker::ContractIdentity;
use crate::primitives::Address;
use crate::Scalar;
pub use correlation::{average_ranks, kendall_tau, pearson, spearman, Strength};
pub use vulns::{
    aggregate_vulnerabilities, from_slither, parse_reports, totals_by_address, Finding, VulnerabilityReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("series lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 2 paired values, got {0}")]
    TooShort(usize),
    #[error("series contains a non-finite value")]
    NonFinite,
    #[error("series is constant; coefficient undefined")]
    DegenerateSeries,
    #[error("only {0} rows joined metrics with vulnerability reports; need at least 2")]
    InsufficientData(usize),
    #[error("invalid vulnerability report: {0}")]
    Report(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series<T = f64> {
    pub label: String,
    pub values: Vec<T>,
}

impl<T: Scalar> Series<T> {
    pub fn new(label: impl Into<String>, values: Vec<T>) -> Result<Self, StatsError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        Ok(Series {
            label: label.into(),
            values,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strengths {
    pub pearson: Option<Strength>,
    pub spearman: Option<Strength>,
    pub kendall_tau: Option<Strength>,
}

/// Coefficients for one pair. A coefficient is `None` when a column is
/// constant over the joined rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult<T = f64> {
    pub pair_label: String,
    pub pearson: Option<T>,
    pub spearman: Option<T>,
    pub kendall_tau: Option<T>,
    pub strength: Strengths,
}

impl<T: Scalar> CorrelationResult<T> {
    pub fn compute(x: &Series<T>, y: &Series<T>) -> Result<Self, StatsError> {
        let keep = |r: Result<T, StatsError>| match r {
            Ok(v) => Ok(Some(v)),
            Err(StatsError::DegenerateSeries) => Ok(None),
            Err(e) => Err(e),
        };
        let p = keep(pearson(&x.values, &y.values))?;
        let s = keep(spearman(&x.values, &y.values))?;
        let k = keep(kendall_tau(&x.values, &y.values))?;
        Ok(CorrelationResult {
            pair_label: format!("{}-{}", x.label, y.label),
            pearson: p,
            spearman: s,
            kendall_tau: k,
            strength: Strengths {
                pearson: p.map(Strength::classify),
                spearman: s.map(Strength::classify),
                kendall_tau: k.map(Strength::classify),
            },
        })
    }
}

/// File-level metrics of one contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow<T = f64> {
    pub address: Address,
    pub sloc: T,
    pub mccabe: T,
    pub halstead_volume: T,
    pub maintainability_index: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix<T = f64> {
    pub rows: Vec<CorrelationResult<T>>,
    pub joined: usize,
    /// Metric rows without a vulnerability report.
    pub dropped: usize,
}

pub const METRIC_LABELS: [&str; 4] = ["SLOC", "McCabe", "HV", "MI"];
pub const VULNERABILITY_LABEL: &str = "Vulnerability";

/// All six metric pairs, then each metric against the vulnerability total,
/// over rows present in both inputs.
pub fn correlation_matrix<T: Scalar>(
    metrics: &[MetricsRow<T>],
    vulns: &BTreeMap<Address, u64>,
) -> Result<CorrelationMatrix<T>, StatsError> {
    let joined: Vec<(&MetricsRow<T>, u64)> = metrics
        .iter()
        .filter_map(|m| vulns.get(&m.address).map(|&v| (m, v)))
        .collect();
    if joined.len() < 2 {
        return Err(StatsError::InsufficientData(joined.len()));
    }
    let column = |f: fn(&MetricsRow<T>) -> T| joined.iter().map(|(m, _)| f(m)).collect::<Vec<T>>();
    let cols = [
        column(|m| m.sloc),
        column(|m| m.mccabe),
        column(|m| m.halstead_volume),
        column(|m| m.maintainability_index),
    ];
    let series: Vec<Series<T>> = METRIC_LABELS
        .iter()
        .zip(cols)
        .map(|(l, c)| Series::new(*l, c))
        .collect::<Result<_, _>>()?;
    let vuln = Series::new(
        VULNERABILITY_LABEL,
        joined.iter().map(|(_, v)| T::from_count(*v as usize)).collect(),
    )?;
    let mut rows = Vec::with_capacity(10);
    for i in 0..series.len() {
        for j in i + 1..series.len() {
            rows.push(CorrelationResult::compute(&series[i], &series[j])?);
        }
    }
    for s in &series {
        rows.push(CorrelationResult::compute(s, &vuln)?);
    }
    Ok(CorrelationMatrix {
        rows,
        joined: joined.len(),
        dropped: metrics.len() - joined.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnerabilityTimeline {
    pub family: ContractIdentity,
    /// (version index, total) for versions with a report, in version order.
    pub totals: Vec<(u32, u64)>,
    /// True unless every analysed version has the same total.
    pub changed: bool,
    /// Versions without a report.
    pub missing: usize,
}

pub fn vulnerability_timeline(
    family: ContractIdentity,
    versions: &[(u32, Address)],
    totals: &BTreeMap<Address, u64>,
) -> VulnerabilityTimeline {
    let mut ordered: Vec<(u32, Address)> = versions.to_vec();
    ordered.sort_by_key(|v| v.0);
    let points: Vec<(u32, u64)> = ordered
        .iter()
        .filter_map(|(i, a)| totals.get(a).map(|t| (*i, *t)))
        .collect();
    let changed = points.windows(2).any(|w| w[0].1 != w[1].1);
    VulnerabilityTimeline {
        family,
        missing: ordered.len() - points.len(),
        totals: points,
        changed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBucket<T = f64> {
    pub label: String,
    pub count: usize,
    pub percent: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionHistogram<T = f64> {
    pub families: usize,
    pub buckets: Vec<HistogramBucket<T>>,
}

/// Families bucketed by version count: exactly 1, 2 to 10, more than 10.
/// Families with no versions are ignored.
pub fn version_histogram<T: Scalar>(version_counts: &[usize]) -> VersionHistogram<T> {
    let mut counts = [0usize; 3];
    for &c in version_counts {
        match c {
            0 => continue,
            1 => counts[0] += 1,
            2..=10 => counts[1] += 1,
            _ => counts[2] += 1,
        }
    }
    let total: usize = counts.iter().sum();
    let pct = |c: usize| {
        if total == 0 {
            T::zero()
        } else {
            T::lit(100.0) * T::from_count(c) / T::from_count(total)
        }
    };
    VersionHistogram {
        families: total,
        buckets: ["1", "2-10", ">10"]
            .iter()
            .zip(counts)
            .map(|(l, c)| HistogramBucket {
                label: l.to_string(),
                count: c,
                percent: pct(c),
            })
            .collect(),
    }
}
