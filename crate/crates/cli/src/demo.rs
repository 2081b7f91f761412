//! A small deterministic synthetic world for trying the pipeline offline:
//! explorer fixtures, a seed dataset and a vulnerability report.
//!
//! The world holds seven name/deployer families, including a 12-version
//! `MultiSigStub` whose vulnerability total never changes, a `Token` whose
//! debt comments go through every tracked change, a 101-version family that
//! the default cap excludes, and an upgradeable proxy.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use verscan_core::gateway::synthetic::{with_metadata, SyntheticChain};
use verscan_core::gateway::{AbiEntry, AbiSpec, VerifiedSource};
use verscan_core::stats::{Finding, VulnerabilityReport};
use verscan_core::Address;

pub struct DemoWorld {
    pub chain: SyntheticChain,
    /// Seed address and contract name, in the order they were chosen.
    pub seeds: Vec<(Address, String)>,
    pub reports: Vec<VulnerabilityReport>,
}

pub struct DemoPaths {
    pub fixtures: PathBuf,
    pub input: PathBuf,
    pub vulns: PathBuf,
}

fn code(family: u8, version: usize) -> Vec<u8> {
    let v = version as u16;
    with_metadata(
        &[
            0x60,
            0x80,
            0x60,
            0x40,
            0x52,
            family,
            (v >> 8) as u8,
            v as u8,
            0x34,
            0x80,
        ],
        family ^ v as u8,
    )
}

fn multisig(i: usize) -> String {
    let mut s = format!(
        "pragma solidity ^0.4.8;

contract MultiSigStub {{
    address[] public owners;
    uint public required = {};

    function MultiSigStub(address[] _owners, uint _required) {{
        owners = _owners;
        required = _required;
    }}

    function isOwner(address who) constant returns (bool) {{
        for (uint k = 0; k < owners.length; k++) {{
            if (owners[k] == who) return true;
        }}
        return false;
    }}
",
        1 + i % 3
    );
    for j in 0..i % 4 {
        s.push_str(&format!(
            "
    function helper{j}(uint x) constant returns (uint) {{
        return x > {j} ? x - {j} : {j};
    }}
"
        ));
    }
    s.push_str("}\n");
    s
}

fn token(i: usize) -> String {
    let transfer = match i {
        1 => "        // TODO: check overflow\n        balances[msg.sender] -= amount;\n        balances[to] += amount;\n",
        2 => "        // TODO: check overflow\n        require(balances[msg.sender] >= amount);\n        balances[msg.sender] -= amount;\n        balances[to] += amount;\n",
        _ => "        require(balances[msg.sender] >= amount);\n        require(balances[to] + amount >= balances[to]);\n        balances[msg.sender] -= amount;\n        balances[to] += amount;\n",
    };
    let mint = match i {
        4 => "        // FIXME: gas heavy loop\n        for (uint k = 0; k < n; k++) {\n            supply += 1;\n        }\n",
        5 => "        for (uint k = 0; k < n; k++) {\n            supply += 1;\n        }\n",
        _ => "        supply += n;\n",
    };
    format!(
        "pragma solidity ^0.8.0;

contract Token {{
    mapping(address => uint256) balances;
    uint256 supply;

    function transfer(address to, uint256 amount) public {{
{transfer}    }}

    function mint(uint256 n) public {{
{mint}    }}
}}
"
    )
}

fn vault(i: usize) -> String {
    let guard = if i >= 2 { "        require(!locked);\n" } else { "" };
    format!(
        "pragma solidity ^0.8.0;

contract Vault {{
    mapping(address => uint256) deposits;
    bool locked;

    function deposit() external payable {{
        deposits[msg.sender] += msg.value;
    }}

    function withdraw(uint256 amount) external {{
{guard}        // workaround for reentrancy until the lock lands
        if (deposits[msg.sender] >= amount) {{
            payable(msg.sender).transfer(amount);
            deposits[msg.sender] -= amount;
        }}
    }}
}}
"
    )
}

fn simple(name: &str, i: usize) -> String {
    format!("pragma solidity ^0.8.0;\n\ncontract {name} {{\n    uint256 public version = {i};\n}}\n")
}

fn source(name: &str, text: String, abi: AbiSpec) -> VerifiedSource {
    VerifiedSource::new(name, text, abi)
}

fn report(address: Address, name: &str, total: u64) -> VulnerabilityReport {
    let mut findings = Vec::new();
    if total > 0 {
        findings.push(Finding::new("reentrancy-eth", "High", total.div_ceil(2)));
    }
    if total > 1 {
        findings.push(Finding::new("tx-origin", "Medium", total / 2));
    }
    VulnerabilityReport {
        address,
        name: name.to_string(),
        deployer: None,
        findings,
    }
}

impl DemoWorld {
    pub fn build() -> Self {
        let mut chain = SyntheticChain::new();
        let mut seeds = Vec::new();
        let mut reports = Vec::new();
        let accounts: Vec<Address> = (0..8).map(|_| chain.new_account()).collect();
        let (d1, d2, d3, d4, d5, d6, d7, owner) = (
            accounts[0],
            accounts[1],
            accounts[2],
            accounts[3],
            accounts[4],
            accounts[5],
            accounts[6],
            accounts[7],
        );

        let factory_abi = AbiSpec::new(vec![
            AbiEntry::new("deployToken", &["bytes"]),
            AbiEntry::new("transfer", &["address", "uint256"]),
        ]);
        let (factory, _) = chain.deploy_direct(
            owner,
            code(0, 0),
            Some(source("TokenFactory", simple("TokenFactory", 1), factory_abi.clone())),
        );

        let mut multisig_addrs = Vec::new();
        for i in 1..=12 {
            chain.mine();
            let (a, _) = chain.deploy_direct(
                d1,
                code(1, i),
                Some(source("MultiSigStub", multisig(i), AbiSpec::default())),
            );
            reports.push(report(a, "MultiSigStub", 4));
            multisig_addrs.push(a);
            chain.transfer(d1, d2);
        }
        seeds.push((multisig_addrs[4], "MultiSigStub".to_string()));

        let (registry, _) = chain.deploy_direct(
            d1,
            code(2, 1),
            Some(source("Registry", simple("Registry", 1), AbiSpec::default())),
        );
        reports.push(report(registry, "Registry", 0));
        seeds.push((registry, "Registry".to_string()));

        let mut token_addrs = Vec::new();
        for (i, total) in (1..=5).zip([3, 3, 2, 2, 1]) {
            chain.mine();
            let src = Some(source("Token", token(i), AbiSpec::default()));
            let a = if i % 2 == 0 {
                chain
                    .deploy_via_factory(d2, factory, &factory_abi.entries[0], code(3, i), src)
                    .0
            } else {
                chain.deploy_direct(d2, code(3, i), src).0
            };
            // Decoy: a transfer call on the factory by the same deployer.
            let mut decoy = factory_abi.entries[1].selector().to_vec();
            decoy.extend_from_slice(&[0u8; 64]);
            chain.call(d2, factory, decoy);
            reports.push(report(a, "Token", total));
            token_addrs.push(a);
        }
        seeds.push((token_addrs[1], "Token".to_string()));
        seeds.push((token_addrs[3], "Token".to_string()));

        for (i, total) in (1..=3).zip([5, 6, 6]) {
            chain.mine();
            let (a, _) = chain.deploy_direct(d3, code(4, i), Some(source("Vault", vault(i), AbiSpec::default())));
            reports.push(report(a, "Vault", total));
            if i == 1 {
                seeds.push((a, "Vault".to_string()));
            }
        }

        for (i, total) in (1..=2).zip([1, 2]) {
            let (a, _) = chain.deploy_direct(
                d4,
                code(5, i),
                Some(source("Wallet", simple("Wallet", i), AbiSpec::default())),
            );
            reports.push(report(a, "Wallet", total));
            if i == 2 {
                seeds.push((a, "Wallet".to_string()));
            }
        }
        let (w5, _) = chain.deploy_direct(
            d5,
            code(6, 1),
            Some(source("Wallet", simple("Wallet", 9), AbiSpec::default())),
        );
        reports.push(report(w5, "Wallet", 1));
        seeds.push((w5, "Wallet".to_string()));

        let mut spam = Vec::new();
        for i in 1..=101 {
            if i % 10 == 0 {
                chain.mine();
            }
            let (a, _) = chain.deploy_direct(
                d6,
                code(7, i),
                Some(source("Spam", simple("Spam", i), AbiSpec::default())),
            );
            spam.push(a);
        }
        seeds.push((spam[49], "Spam".to_string()));

        let proxy_abi = AbiSpec::new(vec![AbiEntry::new("upgradeTo", &["address"])]);
        let mut proxy_src = source("UpgradeableProxy", simple("UpgradeableProxy", 1), proxy_abi.clone());
        proxy_src.is_proxy = true;
        chain.mine();
        let (proxy, _) = chain.deploy_direct(d7, code(8, 1), Some(proxy_src));
        reports.push(report(proxy, "UpgradeableProxy", 1));
        for (i, total) in (1..=2).zip([2, 3]) {
            chain.mine();
            let (logic, _) = chain.deploy_direct(
                d7,
                code(9, i),
                Some(source("Logic", simple("Logic", i), AbiSpec::default())),
            );
            chain.upgrade(d7, proxy, &proxy_abi.entries[0], logic);
            reports.push(report(logic, "Logic", total));
        }
        seeds.push((proxy, "UpgradeableProxy".to_string()));

        DemoWorld { chain, seeds, reports }
    }

    /// Writes `fixtures/`, `input/` and `vulns.json` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<DemoPaths> {
        let paths = DemoPaths {
            fixtures: dir.join("fixtures"),
            input: dir.join("input"),
            vulns: dir.join("vulns.json"),
        };
        self.chain
            .export_fixtures(verscan_core::gateway::MAX_PAGE_SIZE)
            .save_dir(&paths.fixtures)?;
        fs::create_dir_all(&paths.input).with_context(|| format!("creating {}", paths.input.display()))?;
        for (addr, name) in &self.seeds {
            let text = &self.chain.source(*addr).expect("seeds are verified").source_text;
            fs::write(paths.input.join(format!("{addr}_{name}.sol")), text)?;
        }
        fs::write(&paths.vulns, serde_json::to_string_pretty(&self.reports)? + "\n")?;
        Ok(paths)
    }
}
