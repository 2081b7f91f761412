//! Random synthetic chains with a planted version family.
#![allow(dead_code)]

use rand::Rng;
use verscan_core::gateway::synthetic::{with_metadata, SyntheticChain};
use verscan_core::gateway::{AbiEntry, AbiSpec, VerifiedSource};
use verscan_core::Address;

pub struct Planted {
    pub chain: SyntheticChain,
    pub deployer: Address,
    pub name: String,
    /// In creation order.
    pub versions: Vec<Address>,
    pub factory_versions: usize,
}

pub fn factory_abi() -> AbiSpec {
    AbiSpec::new(vec![
        AbiEntry::new("deployContract", &["bytes"]),
        AbiEntry::new("transfer", &["address", "uint256"]),
    ])
}

pub fn source(name: &str, body: &str) -> VerifiedSource {
    VerifiedSource::new(name, format!("contract {name} {{\n{body}\n}}\n"), AbiSpec::default())
}

pub fn bytecode(rng: &mut impl Rng) -> Vec<u8> {
    let len = rng.random_range(8..40);
    let mut code = vec![0x60, 0x80, 0x60, 0x40, 0x52];
    code.extend((0..len).map(|_| rng.random::<u8>()));
    with_metadata(&code, rng.random())
}

/// Chain with `k` versions of one contract by one deployer, deployed directly
/// or through a verified factory, interleaved with distractors: transfers,
/// non-deploy calls, other contracts by the same deployer, unverified
/// creations and same-named contracts by other deployers.
pub fn planted_chain(rng: &mut impl Rng, k: usize) -> Planted {
    let mut chain = SyntheticChain::new();
    let owner = chain.new_account();
    let deployer = chain.new_account();
    let stranger = chain.new_account();
    let abi = factory_abi();
    let (factory, _) = chain.deploy_direct(
        owner,
        bytecode(rng),
        Some(VerifiedSource::new("Factory", "contract Factory {}", abi.clone())),
    );
    let name = format!("Token{}", rng.random_range(0..1000));
    let mut versions = Vec::new();
    let mut factory_versions = 0;
    for i in 0..k {
        if rng.random_bool(0.4) {
            chain.mine();
        }
        let src = source(&name, &format!("uint v = {i};"));
        if rng.random_bool(0.4) {
            let (a, _, _) = chain.deploy_via_factory(deployer, factory, &abi.entries[0], bytecode(rng), Some(src));
            versions.push(a);
            factory_versions += 1;
        } else {
            let (a, _) = chain.deploy_direct(deployer, bytecode(rng), Some(src));
            versions.push(a);
        }
        for _ in 0..rng.random_range(0..4) {
            match rng.random_range(0..6) {
                0 => {
                    chain.transfer(deployer, stranger);
                }
                1 => {
                    let sel = abi.entries[1].selector();
                    let mut input = sel.to_vec();
                    input.extend_from_slice(&[0u8; 64]);
                    chain.call(deployer, factory, input);
                }
                2 => {
                    chain.deploy_direct(deployer, bytecode(rng), Some(source("Other", "")));
                }
                3 => {
                    chain.deploy_direct(deployer, bytecode(rng), None);
                }
                4 => {
                    chain.deploy_direct(stranger, bytecode(rng), Some(source(&name, "uint stranger;")));
                }
                _ => {
                    chain.deploy_via_factory(
                        stranger,
                        factory,
                        &abi.entries[0],
                        bytecode(rng),
                        Some(source(&name, "")),
                    );
                }
            }
        }
    }
    Planted {
        chain,
        deployer,
        name,
        versions,
        factory_versions,
    }
}
