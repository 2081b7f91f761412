//! Versioned smart-contract analysis.
//!
//! * [`gateway`] talks to an Etherscan-compatible explorer under per-key rate
//!   limits, or replays fixtures offline.
//! * [`linker`] classifies transactions, resolves deployers and assembles
//!   version families.
//! * [`metrics`] lexes Solidity and computes SLOC, McCabe, Halstead volume
//!   and the maintainability index.
//! * [`satd`] finds self-admitted technical debt and tracks it across
//!   versions.
//! * [`stats`] computes correlations, vulnerability totals, timelines and
//!   version histograms.
//! * [`store`] persists families on disk.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which the statistics tolerances assume.

pub mod gateway;
pub mod linker;
pub mod metrics;
pub mod primitives;
pub mod satd;
pub mod scalar;
pub mod stats;
pub mod store;

pub use primitives::{Address, Bytes, TxHash};
pub use scalar::Scalar;

/// Metrics record over `f64`.
pub type MetricsRecord = metrics::MetricsRecord<f64>;
/// Metrics record over `f32`.
pub type MetricsRecord32 = metrics::MetricsRecord<f32>;
/// Correlation result over `f64`.
pub type CorrelationResult = stats::CorrelationResult<f64>;
/// Correlation result over `f32`.
pub type CorrelationResult32 = stats::CorrelationResult<f32>;
/// Debt statistics over `f64`.
pub type DebtStats = satd::DebtStats<f64>;
/// Debt statistics over `f32`.
pub type DebtStats32 = satd::DebtStats<f32>;
