//! Transaction classification, deployer resolution and version-family
//! assembly.

pub mod selector;

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{AbiSpec, Direction, Gateway, GatewayError, Transaction, VerifiedSource};
use crate::primitives::Address;
use selector::selector_from_input;

pub use selector::{keccak256, selector_of, Selector};

/// Default version-count cutoff above which a family is treated as anomalous.
pub const DEFAULT_MAX_VERSIONS: usize = 100;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("transaction is not a contract creation")]
    NotCreation,
    #[error("no transaction embeds the target bytecode through a deploy/create method")]
    NoMatch,
    #[error("call selector 0x{0} is not in the factory ABI")]
    AbiMismatch(String),
    #[error("could not resolve the deployer of {0}")]
    UnresolvedDeployer(Address),
    #[error("no creation transaction found for {0}")]
    NoCreationTx(Address),
    #[error("malformed chain data: {0}")]
    MalformedChain(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransactionKind {
    Transfer,
    Creation,
    Interaction,
}

pub fn classify_transaction(tx: &Transaction) -> TransactionKind {
    match (tx.to_addr, tx.input.is_empty(), tx.contract_address) {
        (None, false, Some(_)) => TransactionKind::Creation,
        (Some(_), false, _) => TransactionKind::Interaction,
        _ => TransactionKind::Transfer,
    }
}

/// Name plus deployer: two contracts belong to one family iff both match.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContractIdentity {
    pub name: String,
    pub deployer: Address,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Route {
    Direct,
    Factory { factory: Address, method_name: String },
    ProxyObserved { proxy: Address },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeployerResolution {
    pub deployer: Address,
    pub route: Route,
    /// Factory call the resolution rests on.
    pub evidence: Option<Transaction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractVersion {
    pub identity: ContractIdentity,
    pub address: Address,
    /// 1-based, in chain order of `creation_tx`.
    pub version_index: u32,
    pub creation_tx: Transaction,
    pub source: VerifiedSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractFamily {
    pub identity: ContractIdentity,
    pub route: Route,
    pub versions: Vec<ContractVersion>,
    /// Creations by the deployer whose source is unverified; without a
    /// verified name they cannot be attributed to any family.
    pub unverified_creations: usize,
}

/// Method names a factory deploys through contain "deploy" or "create".
pub fn is_deploy_method(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    lower.contains("deploy") || lower.contains("create")
}

const METADATA_KEYS: [&[u8]; 4] = [b"\x65bzzr0", b"\x65bzzr1", b"\x64ipfs", b"\x64solc"];

/// Bytecode with the solc metadata trailer and anything after it (such as
/// constructor arguments) cut off. Falls back to the full code when no
/// trailer is recognised.
pub fn code_prefix(bytecode: &[u8]) -> &[u8] {
    let mut cut = None;
    for start in 1..bytecode.len() {
        if !(0xa1..=0xa5).contains(&bytecode[start - 1]) {
            continue;
        }
        if METADATA_KEYS.iter().any(|k| bytecode[start..].starts_with(k)) {
            cut = Some(start - 1);
        }
    }
    match cut {
        Some(0) | None => bytecode,
        Some(c) => &bytecode[..c],
    }
}

fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    needle.is_empty() || haystack.windows(needle.len()).any(|w| w == needle)
}

/// Finds the factory call that created a contract with `target_bytecode`.
///
/// A call qualifies when its input embeds the target code and its selector
/// maps to a factory method whose name passes [`is_deploy_method`]. The
/// deployer is the caller.
pub fn resolve_factory_deployment(
    factory: Address,
    target_bytecode: &[u8],
    factory_abi: &AbiSpec,
    factory_txs: &[Transaction],
) -> Result<DeployerResolution, LinkError> {
    if target_bytecode.is_empty() {
        return Err(LinkError::NoMatch);
    }
    let needle = code_prefix(target_bytecode);
    let mut unknown_selector = None;
    for tx in factory_txs.iter().filter(|t| t.to_addr == Some(factory)) {
        if !contains(tx.input.as_slice(), needle) {
            continue;
        }
        let Some(sel) = selector_from_input(tx.input.as_slice()) else {
            continue;
        };
        match factory_abi.find_by_selector(sel) {
            Some(entry) if is_deploy_method(&entry.method_name) => {
                return Ok(DeployerResolution {
                    deployer: tx.from_addr,
                    route: Route::Factory {
                        factory,
                        method_name: entry.method_name.clone(),
                    },
                    evidence: Some(tx.clone()),
                });
            }
            Some(_) => {}
            None => unknown_selector = Some(hex::encode(sel)),
        }
    }
    Err(unknown_selector.map_or(LinkError::NoMatch, LinkError::AbiMismatch))
}

/// Direct when the creator is not a contract, otherwise resolved through the
/// creating factory's incoming calls.
pub fn resolve_deployer(creation_tx: &Transaction, gateway: &Gateway) -> Result<DeployerResolution, LinkError> {
    if classify_transaction(creation_tx) != TransactionKind::Creation {
        return Err(LinkError::NotCreation);
    }
    let creator = creation_tx.from_addr;
    let factory_src = match gateway.get_verified_source(creator) {
        Ok(src) => src,
        Err(GatewayError::NotVerified(_)) => {
            return Ok(DeployerResolution {
                deployer: creator,
                route: Route::Direct,
                evidence: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let incoming = gateway.get_all_transactions(creator, Direction::Normal)?;
    let created = creation_tx.contract_address.expect("creation has an address");
    resolve_factory_deployment(creator, creation_tx.input.as_slice(), &factory_src.abi, &incoming).map_err(
        |e| match e {
            LinkError::NoMatch | LinkError::AbiMismatch(_) => LinkError::UnresolvedDeployer(created),
            other => other,
        },
    )
}

/// Creation record of `address`: its own creation transaction, or the
/// internal creation made by a factory.
pub fn find_creation_tx(address: Address, gateway: &Gateway) -> Result<Transaction, LinkError> {
    for dir in [Direction::Normal, Direction::Internal] {
        let txs = gateway.get_all_transactions(address, dir)?;
        if let Some(tx) = txs
            .into_iter()
            .find(|t| t.contract_address == Some(address) && t.to_addr.is_none())
        {
            return Ok(tx);
        }
    }
    Err(LinkError::NoCreationTx(address))
}

struct Candidate {
    position: (u64, u64),
    record: Transaction,
}

/// Contracts created by the deployer's own factory calls.
fn factory_candidates(deployer: Address, txs: &[Transaction], gateway: &Gateway) -> Result<Vec<Candidate>, LinkError> {
    let mut internal_cache: HashMap<Address, Vec<Transaction>> = HashMap::new();
    let mut out = Vec::new();
    for tx in txs {
        if tx.from_addr != deployer || classify_transaction(tx) != TransactionKind::Interaction {
            continue;
        }
        let factory = tx.to_addr.expect("interaction has a recipient");
        let Some(sel) = selector_from_input(tx.input.as_slice()) else {
            continue;
        };
        let abi = match gateway.get_verified_source(factory) {
            Ok(src) => src.abi,
            Err(GatewayError::NotVerified(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        if !abi
            .find_by_selector(sel)
            .is_some_and(|e| is_deploy_method(&e.method_name))
        {
            continue;
        }
        if let Entry::Vacant(slot) = internal_cache.entry(factory) {
            slot.insert(gateway.get_all_transactions(factory, Direction::Internal)?);
        }
        for rec in internal_cache[&factory]
            .iter()
            .filter(|r| r.hash == tx.hash && r.from_addr == factory && r.contract_address.is_some())
        {
            if resolve_factory_deployment(factory, rec.input.as_slice(), &abi, std::slice::from_ref(tx)).is_ok() {
                let mut record = rec.clone();
                record.block_number = tx.block_number;
                record.tx_index = tx.tx_index;
                out.push(Candidate {
                    position: tx.position(),
                    record,
                });
            }
        }
    }
    Ok(out)
}

fn assemble(
    identity: ContractIdentity,
    route: Route,
    mut found: Vec<(Candidate, VerifiedSource)>,
    unverified: usize,
) -> Result<ContractFamily, LinkError> {
    found.sort_by_key(|(c, _)| c.position);
    if let Some(w) = found.windows(2).find(|w| w[0].0.position == w[1].0.position) {
        return Err(LinkError::MalformedChain(format!(
            "two creations share chain position {:?}",
            w[0].0.position
        )));
    }
    let versions = found
        .into_iter()
        .enumerate()
        .map(|(i, (c, source))| ContractVersion {
            identity: identity.clone(),
            address: c.record.contract_address.expect("creation record has an address"),
            version_index: i as u32 + 1,
            creation_tx: c.record,
            source,
        })
        .collect();
    Ok(ContractFamily {
        identity,
        route,
        versions,
        unverified_creations: unverified,
    })
}

/// All versions of the seed contract: creations by the seed's deployer
/// (direct or through factory calls) whose verified name equals the seed's.
pub fn collect_versions(seed: Address, gateway: &Gateway) -> Result<ContractFamily, LinkError> {
    let seed_src = gateway.get_verified_source(seed)?;
    let creation = find_creation_tx(seed, gateway)?;
    let resolution = resolve_deployer(&creation, gateway)?;
    let deployer = resolution.deployer;
    let txs = gateway.get_all_transactions(deployer, Direction::Normal)?;

    let mut candidates: Vec<Candidate> = txs
        .iter()
        .filter(|t| t.from_addr == deployer && classify_transaction(t) == TransactionKind::Creation)
        .map(|t| Candidate {
            position: t.position(),
            record: t.clone(),
        })
        .collect();
    candidates.extend(factory_candidates(deployer, &txs, gateway)?);

    let mut found = Vec::new();
    let mut unverified = 0;
    for c in candidates {
        let addr = c.record.contract_address.expect("creation record has an address");
        match gateway.get_verified_source(addr) {
            Ok(src) if src.contract_name == seed_src.contract_name => found.push((c, src)),
            Ok(_) => {}
            Err(GatewayError::NotVerified(_)) => unverified += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let identity = ContractIdentity {
        name: seed_src.contract_name,
        deployer,
    };
    assemble(identity, resolution.route, found, unverified)
}

/// Implementation addresses a proxy was upgraded to, in first-seen order.
pub fn enumerate_proxy_implementations(proxy: Address, gateway: &Gateway) -> Result<Vec<Address>, LinkError> {
    let abi = gateway.get_verified_source(proxy)?.abi;
    let txs = gateway.get_all_transactions(proxy, Direction::Normal)?;
    let mut out: Vec<Address> = Vec::new();
    for tx in txs
        .iter()
        .filter(|t| t.to_addr == Some(proxy) && classify_transaction(t) == TransactionKind::Interaction)
    {
        let input = tx.input.as_slice();
        let Some(entry) = selector_from_input(input).and_then(|s| abi.find_by_selector(s)) else {
            continue;
        };
        if !entry.method_name.to_ascii_lowercase().contains("upgrade") {
            continue;
        }
        let Some(arg) = input.get(4..36) else {
            continue;
        };
        if arg[..12].iter().any(|&b| b != 0) {
            continue;
        }
        let mut a = [0u8; 20];
        a.copy_from_slice(&arg[12..]);
        let addr = Address(a);
        if !out.contains(&addr) {
            out.push(addr);
        }
    }
    Ok(out)
}

/// Family built from a proxy's upgrade history. The proxy address stands in
/// for the deployer so these families never merge with directly deployed
/// ones.
pub fn collect_proxy_family(proxy: Address, gateway: &Gateway) -> Result<ContractFamily, LinkError> {
    let name = gateway.get_verified_source(proxy)?.contract_name;
    let mut found = Vec::new();
    let mut unverified = 0;
    for implementation in enumerate_proxy_implementations(proxy, gateway)? {
        match gateway.get_verified_source(implementation) {
            Ok(src) => {
                let record = find_creation_tx(implementation, gateway)?;
                found.push((
                    Candidate {
                        position: record.position(),
                        record,
                    },
                    src,
                ));
            }
            Err(GatewayError::NotVerified(_)) => unverified += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let identity = ContractIdentity { name, deployer: proxy };
    assemble(identity, Route::ProxyObserved { proxy }, found, unverified)
}

/// True when the family has more versions than `max_versions` and should be
/// excluded.
pub fn filter_anomalous(family: &ContractFamily, max_versions: usize) -> bool {
    family.versions.len() > max_versions
}
