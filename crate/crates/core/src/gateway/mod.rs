//! Rate-limited, key-rotating client for an Etherscan-compatible JSON API.

pub mod abi;
pub mod clock;
pub mod limiter;
pub mod synthetic;
pub mod transport;
pub mod types;

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde_json::Value;
use thiserror::Error;

use crate::primitives::Address;
pub use abi::{AbiEntry, AbiSpec};
pub use clock::{Clock, SimClock, SystemClock};
pub use limiter::{ApiKey, Grant, RateLimiter};
pub use transport::{
    FixtureStore, LiveTransport, RecordingTransport, RequestParams, Transport, TransportError, DEFAULT_API_URL,
};
pub use types::{Direction, Transaction, VerifiedSource};

/// Explorer response length limit per query.
pub const MAX_PAGE_SIZE: usize = 50_000;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("no API keys configured")]
    NoKeys,
    #[error("every API key has spent its daily budget")]
    AllKeysExhausted,
    #[error("API error (status {status}): {message}")]
    Api { status: String, message: String },
    #[error("malformed payload: {0}")]
    Parse(String),
    #[error("contract {0} has no verified source")]
    NotVerified(Address),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("no fixture for request {0}")]
    FixtureMiss(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub page_size: usize,
    /// Retries after the first attempt for transient transport failures.
    pub max_retries: u32,
    pub initial_backoff: Duration,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            page_size: MAX_PAGE_SIZE,
            max_retries: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

/// Reads a key file: one key per line, blank lines and `#` comments ignored.
pub fn parse_key_file(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn load_keys(path: &Path) -> Result<Vec<ApiKey>, GatewayError> {
    let text = std::fs::read_to_string(path)?;
    let keys: Vec<ApiKey> = parse_key_file(&text).into_iter().map(ApiKey::new).collect();
    if keys.is_empty() {
        return Err(GatewayError::NoKeys);
    }
    Ok(keys)
}

enum Attempt {
    Done(Value),
    Retry(String),
}

/// Shared client. All accounting sits behind the limiter's lock, so one
/// `Gateway` can serve many worker threads.
pub struct Gateway {
    transport: Box<dyn Transport>,
    limiter: RateLimiter,
    clock: Arc<dyn Clock>,
    config: GatewayConfig,
    sources: Mutex<HashMap<Address, Option<VerifiedSource>>>,
}

impl Gateway {
    pub fn new(
        transport: Box<dyn Transport>,
        limiter: RateLimiter,
        clock: Arc<dyn Clock>,
        config: GatewayConfig,
    ) -> Self {
        Gateway {
            transport,
            limiter,
            clock,
            config,
            sources: Mutex::new(HashMap::new()),
        }
    }

    /// Offline gateway on a simulated clock without throttling.
    pub fn offline(transport: impl Transport + 'static) -> Self {
        Self::new(
            Box::new(transport),
            RateLimiter::unlimited(),
            Arc::new(SimClock::default()),
            GatewayConfig::default(),
        )
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    pub fn limiter(&self) -> &RateLimiter {
        &self.limiter
    }

    pub fn clock(&self) -> &dyn Clock {
        self.clock.as_ref()
    }

    /// Raw payload for one request. Takes a rate-limit slot per attempt and
    /// retries transient failures with exponential backoff.
    pub fn fetch(&self, params: &RequestParams) -> Result<String, GatewayError> {
        let mut backoff = self.config.initial_backoff;
        let mut attempt = 0;
        loop {
            let grant = self.limiter.acquire(self.clock.as_ref())?;
            match self.transport.get(params, grant.key_id.as_deref()) {
                Ok(payload) => return Ok(payload),
                Err(TransportError::Transient(msg)) if attempt < self.config.max_retries => {
                    tracing::warn!(request = %params.canonical(), attempt, error = %msg, "retrying");
                    self.clock.sleep_until(self.clock.now() + backoff);
                    backoff *= 2;
                    attempt += 1;
                }
                Err(TransportError::Transient(msg)) | Err(TransportError::Fatal(msg)) => {
                    return Err(GatewayError::Transport(msg))
                }
                Err(TransportError::FixtureMiss(key)) => return Err(GatewayError::FixtureMiss(key)),
            }
        }
    }

    fn call(&self, params: &RequestParams) -> Result<Value, GatewayError> {
        let mut backoff = self.config.initial_backoff;
        let mut attempt = 0;
        loop {
            let payload = self.fetch(params)?;
            match parse_envelope(&payload)? {
                Attempt::Done(v) => return Ok(v),
                Attempt::Retry(msg) if attempt < self.config.max_retries => {
                    tracing::warn!(request = %params.canonical(), attempt, error = %msg, "throttled by API");
                    self.clock.sleep_until(self.clock.now() + backoff);
                    backoff *= 2;
                    attempt += 1;
                }
                Attempt::Retry(msg) => {
                    return Err(GatewayError::Api {
                        status: "0".into(),
                        message: msg,
                    })
                }
            }
        }
    }

    pub fn transaction_list_params(
        address: Address,
        page: usize,
        page_size: usize,
        direction: Direction,
    ) -> RequestParams {
        RequestParams::new([
            ("module", "account".to_string()),
            ("action", direction.action().to_string()),
            ("address", address.to_string()),
            ("startblock", "0".to_string()),
            ("endblock", "99999999".to_string()),
            ("page", page.to_string()),
            ("offset", page_size.to_string()),
            ("sort", "asc".to_string()),
        ])
    }

    pub fn source_params(address: Address) -> RequestParams {
        RequestParams::new([
            ("module", "contract".to_string()),
            ("action", "getsourcecode".to_string()),
            ("address", address.to_string()),
        ])
    }

    pub fn abi_params(address: Address) -> RequestParams {
        RequestParams::new([
            ("module", "contract".to_string()),
            ("action", "getabi".to_string()),
            ("address", address.to_string()),
        ])
    }

    /// One page of an address's transactions in ascending chain order.
    pub fn get_transaction_list(
        &self,
        address: Address,
        page: usize,
        page_size: usize,
        direction: Direction,
    ) -> Result<Vec<Transaction>, GatewayError> {
        if page == 0 {
            return Err(GatewayError::InvalidRequest("page must be positive".into()));
        }
        if page_size == 0 || page_size > MAX_PAGE_SIZE {
            return Err(GatewayError::InvalidRequest(format!(
                "page size {page_size} outside 1..={MAX_PAGE_SIZE}"
            )));
        }
        let params = Self::transaction_list_params(address, page, page_size, direction);
        let result = self.call(&params)?;
        let items = result
            .as_array()
            .ok_or_else(|| GatewayError::Parse("transaction list result is not an array".into()))?;
        let mut txs = items
            .iter()
            .map(Transaction::from_etherscan)
            .collect::<Result<Vec<_>, _>>()?;
        txs.sort_by_key(Transaction::position);
        Ok(txs)
    }

    /// Every transaction of `address`, paging until a short page.
    pub fn get_all_transactions(
        &self,
        address: Address,
        direction: Direction,
    ) -> Result<Vec<Transaction>, GatewayError> {
        let size = self.config.page_size;
        let mut all = Vec::new();
        for page in 1.. {
            let batch = self.get_transaction_list(address, page, size, direction)?;
            let done = batch.len() < size;
            all.extend(batch);
            if done {
                break;
            }
        }
        Ok(all)
    }

    pub fn get_verified_source(&self, address: Address) -> Result<VerifiedSource, GatewayError> {
        if let Some(cached) = self.sources.lock().expect("cache lock").get(&address) {
            return cached.clone().ok_or(GatewayError::NotVerified(address));
        }
        let result = self.call(&Self::source_params(address))?;
        let first = result
            .as_array()
            .and_then(|a| a.first())
            .ok_or_else(|| GatewayError::Parse("getsourcecode result is not a non-empty array".into()))?;
        let parsed = VerifiedSource::from_etherscan(first)?;
        self.sources.lock().expect("cache lock").insert(address, parsed.clone());
        parsed.ok_or(GatewayError::NotVerified(address))
    }

    pub fn get_abi(&self, address: Address) -> Result<AbiSpec, GatewayError> {
        match self.call(&Self::abi_params(address)) {
            Ok(Value::String(text)) => AbiSpec::from_json(&text).map_err(|e| GatewayError::Parse(e.to_string())),
            Ok(_) => Err(GatewayError::Parse("getabi result is not a string".into())),
            Err(GatewayError::Api { message, .. }) if message.contains("not verified") => {
                Err(GatewayError::NotVerified(address))
            }
            Err(e) => Err(e),
        }
    }

    /// Whether `address` holds a contract, judged by verified-source presence.
    pub fn is_contract(&self, address: Address) -> Result<bool, GatewayError> {
        match self.get_verified_source(address) {
            Ok(_) => Ok(true),
            Err(GatewayError::NotVerified(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }
}

fn parse_envelope(payload: &str) -> Result<Attempt, GatewayError> {
    let v: Value = serde_json::from_str(payload).map_err(|e| GatewayError::Parse(e.to_string()))?;
    let status = v
        .get("status")
        .and_then(Value::as_str)
        .ok_or_else(|| GatewayError::Parse("missing status".into()))?;
    let message = v.get("message").and_then(Value::as_str).unwrap_or("");
    let result = v
        .get("result")
        .cloned()
        .ok_or_else(|| GatewayError::Parse("missing result".into()))?;
    if status == "1" {
        return Ok(Attempt::Done(result));
    }
    if message.starts_with("No transactions found") || message.starts_with("No records found") {
        return Ok(Attempt::Done(Value::Array(vec![])));
    }
    let detail = result.as_str().unwrap_or(message).to_string();
    if detail.to_ascii_lowercase().contains("rate limit") {
        return Ok(Attempt::Retry(detail));
    }
    Err(GatewayError::Api {
        status: status.to_string(),
        message: detail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn key_file_ignores_comments_and_blanks() {
        let keys = parse_key_file("# keys\nAAA\n\n  BBB  # second\n#CCC\n");
        assert_eq!(keys, vec!["AAA", "BBB"]);
    }

    #[test]
    fn envelope_handling() {
        assert!(matches!(
            parse_envelope(r#"{"status":"1","message":"OK","result":[]}"#).unwrap(),
            Attempt::Done(_)
        ));
        match parse_envelope(r#"{"status":"0","message":"No transactions found","result":[]}"#).unwrap() {
            Attempt::Done(v) => assert_eq!(v, json!([])),
            Attempt::Retry(_) => panic!(),
        }
        assert!(matches!(
            parse_envelope(r#"{"status":"0","message":"NOTOK","result":"Max rate limit reached"}"#).unwrap(),
            Attempt::Retry(_)
        ));
        assert!(matches!(
            parse_envelope(r#"{"status":"0","message":"NOTOK","result":"Invalid API Key"}"#),
            Err(GatewayError::Api { .. })
        ));
        assert!(matches!(parse_envelope("not json"), Err(GatewayError::Parse(_))));
    }

    struct Flaky {
        failures: Mutex<u32>,
    }

    impl Transport for Flaky {
        fn get(&self, _: &RequestParams, _: Option<&str>) -> Result<String, TransportError> {
            let mut f = self.failures.lock().unwrap();
            if *f > 0 {
                *f -= 1;
                Err(TransportError::Transient("reset".into()))
            } else {
                Ok(r#"{"status":"1","message":"OK","result":[]}"#.into())
            }
        }
    }

    fn flaky_gateway(failures: u32) -> (Gateway, Arc<SimClock>) {
        let clock = Arc::new(SimClock::new(Duration::from_secs(100)));
        let gw = Gateway::new(
            Box::new(Flaky {
                failures: Mutex::new(failures),
            }),
            RateLimiter::new(vec![ApiKey::new("k")]).unwrap(),
            clock.clone(),
            GatewayConfig::default(),
        );
        (gw, clock)
    }

    #[test]
    fn transient_errors_retried_with_exponential_backoff() {
        let (gw, clock) = flaky_gateway(3);
        gw.fetch(&RequestParams::default()).unwrap();
        // 1 + 2 + 4 seconds of backoff.
        assert_eq!(clock.now(), Duration::from_secs(107));
    }

    #[test]
    fn gives_up_after_three_retries() {
        let (gw, _) = flaky_gateway(4);
        assert!(matches!(
            gw.fetch(&RequestParams::default()),
            Err(GatewayError::Transport(_))
        ));
    }

    #[test]
    fn rejects_bad_page_arguments() {
        let gw = Gateway::offline(FixtureStore::new());
        let a = Address([1; 20]);
        assert!(matches!(
            gw.get_transaction_list(a, 0, 10, Direction::Normal),
            Err(GatewayError::InvalidRequest(_))
        ));
        assert!(matches!(
            gw.get_transaction_list(a, 1, 50_001, Direction::Normal),
            Err(GatewayError::InvalidRequest(_))
        ));
    }
}
