//! Response records and their Etherscan JSON encodings.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::abi::AbiSpec;
use super::GatewayError;
use crate::primitives::{Address, Bytes, TxHash};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Externally signed transactions (`txlist`).
    Normal,
    /// Message calls and creations made by contracts (`txlistinternal`).
    Internal,
}

impl Direction {
    pub fn action(self) -> &'static str {
        match self {
            Direction::Normal => "txlist",
            Direction::Internal => "txlistinternal",
        }
    }
}

/// One chain transaction. For internal records `hash` is the hash of the
/// enclosing external transaction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub hash: TxHash,
    pub from_addr: Address,
    pub to_addr: Option<Address>,
    pub input: Bytes,
    pub contract_address: Option<Address>,
    pub block_number: u64,
    pub tx_index: u64,
    pub timestamp: u64,
}

impl Transaction {
    /// Chain position used for ordering.
    pub fn position(&self) -> (u64, u64) {
        (self.block_number, self.tx_index)
    }

    pub fn from_etherscan(v: &Value) -> Result<Self, GatewayError> {
        let field = |name: &str| -> Result<&str, GatewayError> {
            v.get(name)
                .and_then(Value::as_str)
                .ok_or_else(|| GatewayError::Parse(format!("transaction missing {name:?}")))
        };
        let opt_field = |name: &str| v.get(name).and_then(Value::as_str).unwrap_or("");
        let num = |name: &str, required: bool| -> Result<u64, GatewayError> {
            let s = if required { field(name)? } else { opt_field(name) };
            if s.is_empty() {
                return Ok(0);
            }
            s.parse::<u64>()
                .map_err(|_| GatewayError::Parse(format!("{name} is not an integer: {s:?}")))
        };
        let opt_addr = |name: &str| -> Result<Option<Address>, GatewayError> {
            let s = opt_field(name);
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|e| GatewayError::Parse(format!("{name}: {e}")))
            }
        };
        Ok(Transaction {
            hash: field("hash")?
                .parse()
                .map_err(|e| GatewayError::Parse(format!("hash: {e}")))?,
            from_addr: field("from")?
                .parse()
                .map_err(|e| GatewayError::Parse(format!("from: {e}")))?,
            to_addr: opt_addr("to")?,
            input: opt_field("input")
                .parse()
                .map_err(|e| GatewayError::Parse(format!("input: {e}")))?,
            contract_address: opt_addr("contractAddress")?,
            block_number: num("blockNumber", true)?,
            tx_index: num("transactionIndex", false)?,
            timestamp: num("timeStamp", false)?,
        })
    }

    pub fn to_etherscan(&self) -> Value {
        json!({
            "blockNumber": self.block_number.to_string(),
            "timeStamp": self.timestamp.to_string(),
            "hash": self.hash.to_string(),
            "transactionIndex": self.tx_index.to_string(),
            "from": self.from_addr.to_string(),
            "to": self.to_addr.map(|a| a.to_string()).unwrap_or_default(),
            "input": if self.input.is_empty() { "0x".to_string() } else { self.input.to_string() },
            "contractAddress": self.contract_address.map(|a| a.to_string()).unwrap_or_default(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifiedSource {
    pub contract_name: String,
    pub source_text: String,
    pub compiler_version: String,
    pub abi: AbiSpec,
    /// Explorer flagged the contract as a proxy.
    #[serde(default)]
    pub is_proxy: bool,
    #[serde(default)]
    pub implementation: Option<Address>,
}

impl VerifiedSource {
    pub fn new(name: impl Into<String>, source: impl Into<String>, abi: AbiSpec) -> Self {
        VerifiedSource {
            contract_name: name.into(),
            source_text: source.into(),
            compiler_version: String::new(),
            abi,
            is_proxy: false,
            implementation: None,
        }
    }

    /// Parses one `getsourcecode` result element. Returns `None` for the
    /// explorer's "not verified" shape (empty source).
    pub fn from_etherscan(v: &Value) -> Result<Option<Self>, GatewayError> {
        let s = |name: &str| v.get(name).and_then(Value::as_str).unwrap_or("");
        let source = s("SourceCode");
        if source.is_empty() {
            return Ok(None);
        }
        let abi = AbiSpec::from_json(s("ABI")).map_err(|e| GatewayError::Parse(e.to_string()))?;
        let implementation = match s("Implementation") {
            "" => None,
            a => Some(
                a.parse()
                    .map_err(|e| GatewayError::Parse(format!("Implementation: {e}")))?,
            ),
        };
        Ok(Some(VerifiedSource {
            contract_name: s("ContractName").to_string(),
            source_text: source.to_string(),
            compiler_version: s("CompilerVersion").to_string(),
            abi,
            is_proxy: s("Proxy") == "1",
            implementation,
        }))
    }

    pub fn to_etherscan(&self) -> Value {
        json!({
            "SourceCode": self.source_text,
            "ABI": self.abi.to_json(),
            "ContractName": self.contract_name,
            "CompilerVersion": self.compiler_version,
            "Proxy": if self.is_proxy { "1" } else { "0" },
            "Implementation": self.implementation.map(|a| a.to_string()).unwrap_or_default(),
        })
    }

    /// Result element the explorer returns for unverified addresses.
    pub fn unverified_etherscan() -> Value {
        json!({
            "SourceCode": "",
            "ABI": "Contract source code not verified",
            "ContractName": "",
            "CompilerVersion": "",
            "Proxy": "0",
            "Implementation": "",
        })
    }
}
