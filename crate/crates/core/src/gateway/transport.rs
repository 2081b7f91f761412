//! Request transport: live HTTPS, fixture replay, and recording.
//!
//! Fixture files live flat in one directory, one file per canonicalized
//! request, named `<sha256 of canonical params>.json`:
//!
//! ```json
//! { "request": { "action": "txlist", "address": "0x…", "module": "account", … },
//!   "response": { "status": "1", "message": "OK", "result": [ … ] } }
//! ```
//!
//! The canonical parameter string is `k=v` pairs sorted by key and joined
//! with `&`, with `apikey` excluded so fixtures do not depend on keys.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::GatewayError;

pub const DEFAULT_API_URL: &str = "https://api.etherscan.io/api";

/// Request parameters, ordered by key.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RequestParams(pub BTreeMap<String, String>);

impl RequestParams {
    pub fn new<'a>(pairs: impl IntoIterator<Item = (&'a str, String)>) -> Self {
        RequestParams(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn canonical(&self) -> String {
        self.0
            .iter()
            .filter(|(k, _)| k.as_str() != "apikey")
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("&")
    }

    pub fn fixture_key(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    /// Worth retrying: connection failures, timeouts, 429 and 5xx.
    Transient(String),
    Fatal(String),
    FixtureMiss(String),
}

pub trait Transport: Send + Sync {
    fn get(&self, params: &RequestParams, api_key: Option<&str>) -> Result<String, TransportError>;
}

#[derive(Debug, Serialize, Deserialize)]
struct FixtureFile {
    request: BTreeMap<String, String>,
    response: Value,
}

/// Stored payloads keyed by canonical request.
#[derive(Debug, Default)]
pub struct FixtureStore {
    entries: RwLock<BTreeMap<String, (RequestParams, Value)>>,
}

impl FixtureStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&self, params: &RequestParams, response: Value) {
        let mut clean = params.clone();
        clean.0.remove("apikey");
        self.entries
            .write()
            .expect("fixture lock")
            .insert(params.fixture_key(), (clean, response));
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("fixture lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn load_dir(dir: &Path) -> Result<Self, GatewayError> {
        let store = FixtureStore::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let text = fs::read_to_string(&path)?;
            let file: FixtureFile =
                serde_json::from_str(&text).map_err(|e| GatewayError::Parse(format!("{}: {e}", path.display())))?;
            store.insert(&RequestParams(file.request), file.response);
        }
        Ok(store)
    }

    pub fn save_dir(&self, dir: &Path) -> Result<(), GatewayError> {
        fs::create_dir_all(dir)?;
        for (key, (params, response)) in self.entries.read().expect("fixture lock").iter() {
            let file = FixtureFile {
                request: params.0.clone(),
                response: response.clone(),
            };
            let text = serde_json::to_string_pretty(&file).expect("fixture serializes");
            fs::write(dir.join(format!("{key}.json")), text + "\n")?;
        }
        Ok(())
    }
}

impl Transport for FixtureStore {
    fn get(&self, params: &RequestParams, _api_key: Option<&str>) -> Result<String, TransportError> {
        let entries = self.entries.read().expect("fixture lock");
        entries
            .get(&params.fixture_key())
            .map(|(_, v)| v.to_string())
            .ok_or_else(|| TransportError::FixtureMiss(params.canonical()))
    }
}

/// HTTPS GET against an Etherscan-compatible endpoint.
#[derive(Debug)]
pub struct LiveTransport {
    base_url: String,
    agent: ureq::Agent,
}

impl LiveTransport {
    pub fn new(base_url: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .http_status_as_error(true)
            .build()
            .into();
        LiveTransport {
            base_url: base_url.into(),
            agent,
        }
    }
}

impl Transport for LiveTransport {
    fn get(&self, params: &RequestParams, api_key: Option<&str>) -> Result<String, TransportError> {
        let mut req = self.agent.get(&self.base_url);
        for (k, v) in &params.0 {
            if k != "apikey" {
                req = req.query(k, v);
            }
        }
        if let Some(key) = api_key {
            req = req.query("apikey", key);
        }
        match req.call() {
            Ok(mut resp) => resp
                .body_mut()
                .read_to_string()
                .map_err(|e| TransportError::Transient(e.to_string())),
            Err(ureq::Error::StatusCode(code)) if code == 429 || code >= 500 => {
                Err(TransportError::Transient(format!("HTTP {code}")))
            }
            Err(ureq::Error::StatusCode(code)) => Err(TransportError::Fatal(format!("HTTP {code}"))),
            Err(e) => Err(TransportError::Transient(e.to_string())),
        }
    }
}

/// Forwards to an inner transport and keeps every successful JSON payload
/// so the session can be replayed offline.
pub struct RecordingTransport<T> {
    inner: T,
    recorded: FixtureStore,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T) -> Self {
        RecordingTransport {
            inner,
            recorded: FixtureStore::new(),
        }
    }

    pub fn recorded(&self) -> &FixtureStore {
        &self.recorded
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn get(&self, params: &RequestParams, api_key: Option<&str>) -> Result<String, TransportError> {
        let payload = self.inner.get(params, api_key)?;
        if let Ok(v) = serde_json::from_str::<Value>(&payload) {
            self.recorded.insert(params, v);
        }
        Ok(payload)
    }
}

impl<T: Transport + ?Sized> Transport for Arc<T> {
    fn get(&self, params: &RequestParams, api_key: Option<&str>) -> Result<String, TransportError> {
        (**self).get(params, api_key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn params(addr: &str, key: Option<&str>) -> RequestParams {
        let mut p = RequestParams::new([
            ("module", "account".to_string()),
            ("action", "txlist".to_string()),
            ("address", addr.to_string()),
        ]);
        if let Some(k) = key {
            p.0.insert("apikey".into(), k.into());
        }
        p
    }

    #[test]
    fn canonical_form_is_sorted_and_key_independent() {
        let a = params("0xabc", Some("KEY1"));
        let b = params("0xabc", Some("KEY2"));
        assert_eq!(a.canonical(), "action=txlist&address=0xabc&module=account");
        assert_eq!(a.fixture_key(), b.fixture_key());
        assert_ne!(a.fixture_key(), params("0xabd", None).fixture_key());
    }

    #[test]
    fn miss_and_deterministic_hit() {
        let store = FixtureStore::new();
        store.insert(
            &params("0xabc", None),
            json!({"status": "1", "message": "OK", "result": []}),
        );
        let first = store.get(&params("0xabc", Some("k")), Some("k")).unwrap();
        let second = store.get(&params("0xabc", None), None).unwrap();
        assert_eq!(first, second);
        assert!(matches!(
            store.get(&params("0xdef", None), None),
            Err(TransportError::FixtureMiss(_))
        ));
    }

    #[test]
    fn save_and_load_directory() {
        let dir = tempfile::tempdir().unwrap();
        let store = FixtureStore::new();
        store.insert(
            &params("0xabc", Some("secret")),
            json!({"status": "1", "result": [1, 2]}),
        );
        store.save_dir(dir.path()).unwrap();
        let text =
            fs::read_to_string(dir.path().join(format!("{}.json", params("0xabc", None).fixture_key()))).unwrap();
        assert!(!text.contains("secret"));
        let loaded = FixtureStore::load_dir(dir.path()).unwrap();
        assert_eq!(
            loaded.get(&params("0xabc", None), None).unwrap(),
            store.get(&params("0xabc", None), None).unwrap()
        );
    }

    #[test]
    fn recording_captures_payloads() {
        let inner = FixtureStore::new();
        inner.insert(&params("0x1", None), json!({"status": "1", "result": "x"}));
        let rec = RecordingTransport::new(inner);
        rec.get(&params("0x1", Some("k")), Some("k")).unwrap();
        assert_eq!(rec.recorded().len(), 1);
    }
}
