//! In-memory chain used to build offline fixtures.
//!
//! `SyntheticChain` records deployments, factory calls, proxy upgrades and
//! plain transfers, then answers explorer requests for them either directly
//! (as a [`Transport`]) or by exporting a [`FixtureStore`].

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use super::abi::AbiEntry;
use super::transport::{FixtureStore, RequestParams, Transport, TransportError};
use super::types::{Direction, Transaction, VerifiedSource};
use super::Gateway;
use crate::linker::selector::keccak256;
use crate::primitives::{Address, Bytes, TxHash};

/// Legacy solc metadata trailer: `a1 65 "bzzr0" 58 20 <32-byte hash> 00 29`.
pub fn with_metadata(code: &[u8], hash_seed: u8) -> Vec<u8> {
    let mut out = code.to_vec();
    out.extend_from_slice(&[0xa1, 0x65, b'b', b'z', b'z', b'r', b'0', 0x58, 0x20]);
    out.extend_from_slice(&keccak256([hash_seed]));
    out.extend_from_slice(&[0x00, 0x29]);
    out
}

fn word(bytes: &[u8]) -> [u8; 32] {
    let mut w = [0u8; 32];
    w[32 - bytes.len()..].copy_from_slice(bytes);
    w
}

/// Call data for `method(bytes)`.
pub fn encode_bytes_call(entry: &AbiEntry, data: &[u8]) -> Vec<u8> {
    let mut out = entry.selector().to_vec();
    out.extend_from_slice(&word(&[0x20]));
    out.extend_from_slice(&word(&(data.len() as u64).to_be_bytes()));
    out.extend_from_slice(data);
    out.resize(out.len() + (32 - data.len() % 32) % 32, 0);
    out
}

/// Call data whose first argument is an address.
pub fn encode_address_call(entry: &AbiEntry, addr: Address) -> Vec<u8> {
    let mut out = entry.selector().to_vec();
    out.extend_from_slice(&word(&addr.0));
    out
}

#[derive(Debug, Clone, Default)]
pub struct SyntheticChain {
    normal: Vec<Transaction>,
    internal: Vec<Transaction>,
    sources: BTreeMap<Address, VerifiedSource>,
    accounts: BTreeSet<Address>,
    block: u64,
    index: u64,
    counter: u64,
}

impl SyntheticChain {
    pub fn new() -> Self {
        SyntheticChain {
            block: 1_000_000,
            ..Default::default()
        }
    }

    fn fresh(&mut self, tag: &[u8]) -> [u8; 32] {
        self.counter += 1;
        let mut seed = tag.to_vec();
        seed.extend_from_slice(&self.counter.to_be_bytes());
        keccak256(seed)
    }

    pub fn new_account(&mut self) -> Address {
        let h = self.fresh(b"account");
        let mut a = [0u8; 20];
        a.copy_from_slice(&h[12..]);
        self.accounts.insert(Address(a));
        Address(a)
    }

    /// Starts a new block; later transactions get index 0, 1, ….
    pub fn mine(&mut self) {
        self.block += 1;
        self.index = 0;
    }

    /// Jumps several blocks ahead.
    pub fn mine_many(&mut self, blocks: u64) {
        self.block += blocks;
        self.index = 0;
    }

    fn push(&mut self, from: Address, to: Option<Address>, input: Vec<u8>, created: Option<Address>) -> Transaction {
        let tx = Transaction {
            hash: TxHash(self.fresh(b"tx")),
            from_addr: from,
            to_addr: to,
            input: Bytes(input),
            contract_address: created,
            block_number: self.block,
            tx_index: self.index,
            timestamp: 1_500_000_000 + self.block * 13,
        };
        self.index += 1;
        self.normal.push(tx.clone());
        tx
    }

    pub fn set_source(&mut self, address: Address, source: VerifiedSource) {
        self.sources.insert(address, source);
    }

    pub fn source(&self, address: Address) -> Option<&VerifiedSource> {
        self.sources.get(&address)
    }

    /// Contract created by an externally signed creation transaction.
    pub fn deploy_direct(
        &mut self,
        deployer: Address,
        bytecode: Vec<u8>,
        source: Option<VerifiedSource>,
    ) -> (Address, Transaction) {
        let addr = self.new_account();
        let tx = self.push(deployer, None, bytecode, Some(addr));
        if let Some(s) = source {
            self.sources.insert(addr, s);
        }
        (addr, tx)
    }

    /// `caller` invokes `method(bytes)` on `factory`, which creates a contract
    /// from the passed bytecode. Returns the new address, the external call
    /// and the internal creation record.
    pub fn deploy_via_factory(
        &mut self,
        caller: Address,
        factory: Address,
        method: &AbiEntry,
        bytecode: Vec<u8>,
        source: Option<VerifiedSource>,
    ) -> (Address, Transaction, Transaction) {
        let addr = self.new_account();
        let call = self.push(caller, Some(factory), encode_bytes_call(method, &bytecode), None);
        let created = Transaction {
            hash: call.hash,
            from_addr: factory,
            to_addr: None,
            input: Bytes(bytecode),
            contract_address: Some(addr),
            block_number: call.block_number,
            tx_index: call.tx_index,
            timestamp: call.timestamp,
        };
        self.internal.push(created.clone());
        if let Some(s) = source {
            self.sources.insert(addr, s);
        }
        (addr, call, created)
    }

    pub fn call(&mut self, from: Address, to: Address, input: Vec<u8>) -> Transaction {
        self.push(from, Some(to), input, None)
    }

    pub fn transfer(&mut self, from: Address, to: Address) -> Transaction {
        self.push(from, Some(to), Vec::new(), None)
    }

    pub fn upgrade(
        &mut self,
        caller: Address,
        proxy: Address,
        method: &AbiEntry,
        implementation: Address,
    ) -> Transaction {
        self.push(caller, Some(proxy), encode_address_call(method, implementation), None)
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.normal
    }

    fn involved(tx: &Transaction, a: Address) -> bool {
        tx.from_addr == a || tx.to_addr == Some(a) || tx.contract_address == Some(a)
    }

    fn list(&self, address: Address, direction: Direction) -> Vec<&Transaction> {
        let pool = match direction {
            Direction::Normal => &self.normal,
            Direction::Internal => &self.internal,
        };
        let mut txs: Vec<&Transaction> = pool.iter().filter(|t| Self::involved(t, address)).collect();
        txs.sort_by_key(|t| t.position());
        txs
    }

    fn addresses(&self) -> BTreeSet<Address> {
        let mut set: BTreeSet<Address> = self.sources.keys().copied().collect();
        set.extend(&self.accounts);
        for tx in self.normal.iter().chain(&self.internal) {
            set.insert(tx.from_addr);
            set.extend(tx.to_addr);
            set.extend(tx.contract_address);
        }
        set
    }

    /// Explorer response for `params`, or `None` if the request is not one
    /// the explorer understands.
    pub fn respond(&self, params: &RequestParams) -> Option<Value> {
        let address: Address = params.get("address")?.parse().ok()?;
        match (params.get("module")?, params.get("action")?) {
            ("account", action @ ("txlist" | "txlistinternal")) => {
                let direction = if action == "txlist" {
                    Direction::Normal
                } else {
                    Direction::Internal
                };
                let page: usize = params.get("page")?.parse().ok()?;
                let size: usize = params.get("offset")?.parse().ok()?;
                let all = self.list(address, direction);
                let items: Vec<Value> = all
                    .iter()
                    .skip(page.saturating_sub(1).saturating_mul(size))
                    .take(size)
                    .map(|t| t.to_etherscan())
                    .collect();
                Some(if items.is_empty() {
                    json!({"status": "0", "message": "No transactions found", "result": []})
                } else {
                    json!({"status": "1", "message": "OK", "result": items})
                })
            }
            ("contract", "getsourcecode") => {
                let item = self
                    .sources
                    .get(&address)
                    .map(VerifiedSource::to_etherscan)
                    .unwrap_or_else(VerifiedSource::unverified_etherscan);
                Some(json!({"status": "1", "message": "OK", "result": [item]}))
            }
            ("contract", "getabi") => Some(match self.sources.get(&address) {
                Some(s) => json!({"status": "1", "message": "OK", "result": s.abi.to_json()}),
                None => json!({"status": "0", "message": "NOTOK", "result": "Contract source code not verified"}),
            }),
            _ => None,
        }
    }

    /// Every request the pipeline can issue for addresses on this chain, at
    /// the given page size.
    pub fn export_fixtures(&self, page_size: usize) -> FixtureStore {
        let store = FixtureStore::new();
        for addr in self.addresses() {
            for dir in [Direction::Normal, Direction::Internal] {
                let pages = self.list(addr, dir).len() / page_size + 1;
                for page in 1..=pages {
                    let p = Gateway::transaction_list_params(addr, page, page_size, dir);
                    store.insert(&p, self.respond(&p).expect("known request"));
                }
            }
            for p in [Gateway::source_params(addr), Gateway::abi_params(addr)] {
                store.insert(&p, self.respond(&p).expect("known request"));
            }
        }
        store
    }
}

impl Transport for SyntheticChain {
    fn get(&self, params: &RequestParams, _api_key: Option<&str>) -> Result<String, TransportError> {
        self.respond(params)
            .map(|v| v.to_string())
            .ok_or_else(|| TransportError::Fatal(format!("unsupported request {}", params.canonical())))
    }
}
