//! Seeds → version families on disk.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;
use std::thread;

use anyhow::{bail, Context, Result};
use tracing::{info, warn};
use verscan_core::gateway::{
    load_keys, FixtureStore, Gateway, GatewayConfig, GatewayError, LiveTransport, RateLimiter, RecordingTransport,
    SystemClock,
};
use verscan_core::linker::{collect_proxy_family, collect_versions, filter_anomalous, ContractFamily, LinkError};
use verscan_core::store::{parse_sanctuary_name, DatasetLayout, Manifest};
use verscan_core::Address;

use super::files_with_extension;
use crate::{Outcome, RunConfig};

/// Seed addresses from a directory of `<address>_<name>.sol` files, or from
/// a text file with one address or such file name per line. Returns the
/// sorted unique seeds and the number of unusable entries.
pub fn read_seeds(input: &Path) -> Result<(Vec<Address>, usize)> {
    let mut seeds = BTreeSet::new();
    let mut bad = 0;
    let mut take = |entry: &str| {
        let entry = entry.trim();
        let parsed = entry
            .parse::<Address>()
            .ok()
            .or_else(|| parse_sanctuary_name(entry).ok().map(|(a, _)| a));
        match parsed {
            Some(a) => {
                seeds.insert(a);
            }
            None => {
                warn!(entry, "skipping unusable seed entry");
                bad += 1;
            }
        }
    };
    if input.is_dir() {
        for path in files_with_extension(input, "sol")? {
            take(&path.file_name().unwrap_or_default().to_string_lossy());
        }
    } else {
        let text = std::fs::read_to_string(input).with_context(|| format!("reading input {}", input.display()))?;
        for line in text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        {
            take(line);
        }
    }
    Ok((seeds.into_iter().collect(), bad))
}

struct Explorer {
    gateway: Gateway,
    recording: Option<Arc<RecordingTransport<LiveTransport>>>,
}

fn explorer(cfg: &RunConfig) -> Result<Explorer> {
    if let Some(dir) = &cfg.fixtures {
        let store = FixtureStore::load_dir(dir).with_context(|| format!("loading fixtures from {}", dir.display()))?;
        info!(fixtures = store.len(), dir = %dir.display(), "replaying fixtures");
        return Ok(Explorer {
            gateway: Gateway::offline(store),
            recording: None,
        });
    }
    let limiter = match &cfg.keys {
        Some(path) => {
            RateLimiter::new(load_keys(path).with_context(|| format!("loading keys from {}", path.display()))?)?
        }
        None => {
            warn!("no --keys given; using the keyless rate of one request per five seconds");
            RateLimiter::keyless()
        }
    };
    let live = LiveTransport::new(cfg.api_url.clone());
    let clock = Arc::new(SystemClock);
    let config = GatewayConfig::default();
    Ok(match &cfg.record {
        Some(_) => {
            let rec = Arc::new(RecordingTransport::new(live));
            Explorer {
                gateway: Gateway::new(Box::new(Arc::clone(&rec)), limiter, clock, config),
                recording: Some(rec),
            }
        }
        None => Explorer {
            gateway: Gateway::new(Box::new(live), limiter, clock, config),
            recording: None,
        },
    })
}

/// Families reachable from one seed: its own, plus the upgrade history when
/// the explorer flags the seed as a proxy.
fn families_for_seed(seed: Address, gateway: &Gateway) -> Result<Vec<ContractFamily>, LinkError> {
    let mut out = vec![collect_versions(seed, gateway)?];
    if gateway.get_verified_source(seed)?.is_proxy {
        let proxy = collect_proxy_family(seed, gateway)?;
        if !proxy.versions.is_empty() {
            out.push(proxy);
        }
    }
    Ok(out)
}

/// Collects the seed's families and writes those under the version cap.
fn process_seed(
    seed: Address,
    gateway: &Gateway,
    layout: &DatasetLayout,
    max_versions: usize,
) -> Result<Vec<ContractFamily>> {
    let families = families_for_seed(seed, gateway)?;
    for fam in families.iter().filter(|f| !filter_anomalous(f, max_versions)) {
        for v in &fam.versions {
            layout.write_version(v)?;
        }
    }
    Ok(families)
}

type SeedOutcome = (Address, Result<Vec<ContractFamily>, String>);

pub fn run(cfg: &RunConfig) -> Result<(Manifest, Outcome)> {
    cfg.validate()?;
    let (seeds, bad_entries) = read_seeds(&cfg.input)?;
    let explorer = explorer(cfg)?;
    let gateway = &explorer.gateway;
    let layout = DatasetLayout::new(&cfg.output);
    std::fs::create_dir_all(&cfg.output).with_context(|| format!("creating {}", cfg.output.display()))?;

    let chunk = seeds.len().div_ceil(cfg.workers).max(1);
    let max_versions = cfg.max_versions;
    let per_worker: Vec<Vec<SeedOutcome>> = thread::scope(|s| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .enumerate()
            .map(|(worker, slice)| {
                let layout = &layout;
                s.spawn(move || {
                    info!(worker, seeds = slice.len(), "worker started");
                    let mut out = Vec::with_capacity(slice.len());
                    for &seed in slice {
                        match process_seed(seed, gateway, layout, max_versions) {
                            Ok(f) => out.push((seed, Ok(f))),
                            Err(e) => {
                                warn!(worker, seed = %seed, error = %format!("{e:#}"), "seed skipped");
                                let fatal = e
                                    .downcast_ref::<LinkError>()
                                    .is_some_and(|l| matches!(l, LinkError::Gateway(GatewayError::AllKeysExhausted)));
                                out.push((seed, Err(format!("{e:#}"))));
                                if fatal {
                                    break;
                                }
                            }
                        }
                    }
                    info!(worker, "worker finished");
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });

    let mut families: BTreeMap<_, ContractFamily> = BTreeMap::new();
    let mut failed = 0;
    let mut processed = 0;
    for (_, result) in per_worker.into_iter().flatten() {
        processed += 1;
        match result {
            Ok(found) => {
                for f in found {
                    families.entry(f.identity.clone()).or_insert(f);
                }
            }
            Err(_) => failed += 1,
        }
    }
    // Seeds never reached because every key ran out.
    failed += seeds.len() - processed;

    let mut manifest = Manifest {
        seeds: seeds.len(),
        ..Manifest::default()
    };
    for (identity, fam) in &families {
        if filter_anomalous(fam, max_versions) {
            info!(name = %identity.name, deployer = %identity.deployer, versions = fam.versions.len(), "family excluded as anomalous");
            manifest.excluded_anomalous += 1;
            manifest.excluded.push(identity.clone());
        } else {
            manifest.families += 1;
            manifest.versions += fam.versions.len();
        }
    }
    manifest.failed = failed;
    layout.write_manifest(&manifest)?;

    if let (Some(rec), Some(dir)) = (&explorer.recording, &cfg.record) {
        rec.recorded().save_dir(dir)?;
        info!(dir = %dir.display(), responses = rec.recorded().len(), "recorded explorer responses");
    }
    info!(
        seeds = manifest.seeds,
        families = manifest.families,
        versions = manifest.versions,
        excluded = manifest.excluded_anomalous,
        failed,
        "extract finished"
    );
    if !seeds.is_empty() && failed == seeds.len() {
        bail!("every seed failed; see the log for per-seed errors");
    }
    Ok((manifest, Outcome::from_skipped(failed + bad_entries)))
}
