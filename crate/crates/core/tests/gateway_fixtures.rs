use std::sync::Arc;

use serde_json::json;
use verscan_core::gateway::synthetic::SyntheticChain;
use verscan_core::gateway::{Direction, FixtureStore, Gateway, GatewayError, RecordingTransport};
use verscan_core::Address;

const MULTISIG: &str = "0x004de0313fd383c166b6f4390f1ba6c476c505d1";

fn chain_with_transfers(n: usize) -> (SyntheticChain, Address) {
    let mut chain = SyntheticChain::new();
    let a = chain.new_account();
    let b = chain.new_account();
    for _ in 0..n {
        chain.transfer(a, b);
    }
    (chain, a)
}

fn saved_and_reloaded(store: &FixtureStore) -> FixtureStore {
    let dir = tempfile::tempdir().unwrap();
    store.save_dir(dir.path()).unwrap();
    FixtureStore::load_dir(dir.path()).unwrap()
}

#[test]
fn three_transactions_on_one_page() {
    let (chain, a) = chain_with_transfers(3);
    let gw = Gateway::offline(saved_and_reloaded(&chain.export_fixtures(50_000)));
    let txs = gw.get_transaction_list(a, 1, 50_000, Direction::Normal).unwrap();
    assert_eq!(txs.len(), 3);
}

#[test]
fn second_page_of_seven_has_two() {
    let (chain, a) = chain_with_transfers(7);
    let gw = Gateway::offline(saved_and_reloaded(&chain.export_fixtures(5)));
    assert_eq!(gw.get_transaction_list(a, 1, 5, Direction::Normal).unwrap().len(), 5);
    assert_eq!(gw.get_transaction_list(a, 2, 5, Direction::Normal).unwrap().len(), 2);
}

#[test]
fn unknown_address_has_no_transactions() {
    let (chain, _) = chain_with_transfers(1);
    let gw = Gateway::offline(chain);
    let unknown: Address = "0x00000000000000000000000000000000000000ff".parse().unwrap();
    assert!(gw
        .get_transaction_list(unknown, 1, 100, Direction::Normal)
        .unwrap()
        .is_empty());
    assert!(gw
        .get_all_transactions(unknown, Direction::Internal)
        .unwrap()
        .is_empty());
}

fn explorer_source_payload() -> FixtureStore {
    let store = FixtureStore::new();
    let addr: Address = MULTISIG.parse().unwrap();
    store.insert(
        &Gateway::source_params(addr),
        json!({"status": "1", "message": "OK", "result": [{
            "SourceCode": "pragma solidity ^0.4.8;\ncontract MultiSigStub { address[] public owners; }",
            "ABI": "[{\"type\":\"function\",\"name\":\"owners\",\"inputs\":[{\"name\":\"\",\"type\":\"uint256\"}],\"outputs\":[{\"name\":\"\",\"type\":\"address\"}]}]",
            "ContractName": "MultiSigStub",
            "CompilerVersion": "v0.4.15+commit.bbb8e64f",
            "OptimizationUsed": "1",
            "Runs": "200",
            "ConstructorArguments": "",
            "EVMVersion": "Default",
            "Library": "",
            "LicenseType": "",
            "Proxy": "0",
            "Implementation": "",
            "SwarmSource": ""
        }]}),
    );
    let unverified: Address = "0x00000000000000000000000000000000000000aa".parse().unwrap();
    store.insert(
        &Gateway::source_params(unverified),
        json!({"status": "1", "message": "OK", "result": [{
            "SourceCode": "", "ABI": "Contract source code not verified", "ContractName": "",
            "CompilerVersion": "", "Proxy": "0", "Implementation": ""
        }]}),
    );
    store
}

#[test]
fn verified_source_from_explorer_payload() {
    let gw = Gateway::offline(saved_and_reloaded(&explorer_source_payload()));
    let src = gw.get_verified_source(MULTISIG.parse().unwrap()).unwrap();
    assert_eq!(src.contract_name, "MultiSigStub");
    assert!(!src.source_text.is_empty());
    assert_eq!(src.abi.entries[0].canonical_signature(), "owners(uint256)");
    assert!(!src.is_proxy);
    let unverified = "0x00000000000000000000000000000000000000aa".parse().unwrap();
    assert!(matches!(
        gw.get_verified_source(unverified),
        Err(GatewayError::NotVerified(_))
    ));
}

#[test]
fn fixture_miss_and_replay_determinism() {
    let gw = Gateway::offline(explorer_source_payload());
    let other: Address = "0x00000000000000000000000000000000000000bb".parse().unwrap();
    assert!(matches!(
        gw.get_verified_source(other),
        Err(GatewayError::FixtureMiss(_))
    ));
    let p = Gateway::source_params(MULTISIG.parse().unwrap());
    assert_eq!(gw.fetch(&p).unwrap(), gw.fetch(&p).unwrap());
}

#[test]
fn recorded_session_replays_identically() {
    let (chain, a) = chain_with_transfers(12);
    let recording = Arc::new(RecordingTransport::new(chain));
    let live = Gateway::offline(Arc::clone(&recording));
    let first = live.get_all_transactions(a, Direction::Normal).unwrap();
    let replay = Gateway::offline(saved_and_reloaded(recording.recorded()));
    let second = replay.get_all_transactions(a, Direction::Normal).unwrap();
    assert_eq!(first.len(), 12);
    assert_eq!(first, second);
}
