//! Contract ABI: the callable methods of a contract and their canonical
//! signatures.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::linker::selector::{selector_of, Selector};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbiEntry {
    pub method_name: String,
    pub parameter_types: Vec<String>,
}

impl AbiEntry {
    pub fn new(name: impl Into<String>, types: &[&str]) -> Self {
        AbiEntry {
            method_name: name.into(),
            parameter_types: types.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// `name(type1,type2)` without spaces.
    pub fn canonical_signature(&self) -> String {
        format!("{}({})", self.method_name, self.parameter_types.join(","))
    }

    pub fn selector(&self) -> Selector {
        selector_of(&self.canonical_signature())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbiSpec {
    pub entries: Vec<AbiEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum AbiError {
    #[error("ABI is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("ABI must be a JSON array")]
    NotArray,
}

impl AbiSpec {
    pub fn new(entries: Vec<AbiEntry>) -> Self {
        AbiSpec { entries }
    }

    /// Parses a standard JSON ABI, keeping `function` entries (entries without
    /// a `type` default to function, as solc emitted in early versions).
    pub fn from_json(text: &str) -> Result<Self, AbiError> {
        let v: Value = serde_json::from_str(text)?;
        let items = v.as_array().ok_or(AbiError::NotArray)?;
        let mut entries = Vec::new();
        for item in items {
            let kind = item.get("type").and_then(Value::as_str).unwrap_or("function");
            if kind != "function" {
                continue;
            }
            let Some(name) = item.get("name").and_then(Value::as_str) else {
                continue;
            };
            let types = item
                .get("inputs")
                .and_then(Value::as_array)
                .map(|ins| ins.iter().map(canonical_type).collect())
                .unwrap_or_default();
            entries.push(AbiEntry {
                method_name: name.to_string(),
                parameter_types: types,
            });
        }
        Ok(AbiSpec { entries })
    }

    pub fn to_json(&self) -> String {
        let items: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                serde_json::json!({
                    "type": "function",
                    "name": e.method_name,
                    "inputs": e.parameter_types.iter().map(|t| serde_json::json!({"name": "", "type": t})).collect::<Vec<_>>(),
                    "outputs": [],
                })
            })
            .collect();
        Value::Array(items).to_string()
    }

    pub fn find_by_selector(&self, selector: Selector) -> Option<&AbiEntry> {
        self.entries.iter().find(|e| e.selector() == selector)
    }
}

/// Canonical type of one ABI parameter; tuples expand to `(t1,t2)` plus any
/// array suffix.
fn canonical_type(param: &Value) -> String {
    let ty = param.get("type").and_then(Value::as_str).unwrap_or("");
    if let Some(suffix) = ty.strip_prefix("tuple") {
        let inner: Vec<String> = param
            .get("components")
            .and_then(Value::as_array)
            .map(|cs| cs.iter().map(canonical_type).collect())
            .unwrap_or_default();
        format!("({}){}", inner.join(","), suffix)
    } else {
        canonical_alias(ty)
    }
}

fn canonical_alias(ty: &str) -> String {
    let (base, suffix) = match ty.find('[') {
        Some(i) => ty.split_at(i),
        None => (ty, ""),
    };
    let base = match base {
        "uint" => "uint256",
        "int" => "int256",
        "byte" => "bytes1",
        "fixed" => "fixed128x18",
        "ufixed" => "ufixed128x18",
        other => other,
    };
    format!("{base}{suffix}")
}
