//! Per-key request accounting with round-robin key rotation.
//!
//! Every key carries a sliding-window budget (default 5 requests per second)
//! and a daily budget (default 100,000). Daily counters reset at UTC day
//! boundaries of the injected clock.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

use serde::Serialize;

use super::clock::Clock;
use super::GatewayError;

pub const DEFAULT_PER_SECOND_BUDGET: u32 = 5;
pub const DEFAULT_DAILY_BUDGET: u64 = 100_000;
/// Keyless access is limited to one request every five seconds.
pub const KEYLESS_WINDOW: Duration = Duration::from_secs(5);

const DAY: u64 = 86_400;

#[derive(Debug, Clone, Serialize)]
pub struct ApiKey {
    /// `None` for keyless access.
    pub key_id: Option<String>,
    pub per_second_budget: u32,
    pub daily_budget: u64,
    pub used_today: u64,
    /// Length of the sliding window the per-window budget applies to.
    #[serde(skip)]
    pub window: Duration,
    #[serde(skip)]
    issued: VecDeque<Duration>,
}

impl ApiKey {
    pub fn new(key_id: impl Into<String>) -> Self {
        Self::with_budgets(key_id, DEFAULT_PER_SECOND_BUDGET, DEFAULT_DAILY_BUDGET)
    }

    pub fn with_budgets(key_id: impl Into<String>, per_second: u32, daily: u64) -> Self {
        ApiKey {
            key_id: Some(key_id.into()),
            per_second_budget: per_second,
            daily_budget: daily,
            used_today: 0,
            window: Duration::from_secs(1),
            issued: VecDeque::new(),
        }
    }

    pub fn keyless() -> Self {
        ApiKey {
            key_id: None,
            per_second_budget: 1,
            daily_budget: u64::MAX,
            used_today: 0,
            window: KEYLESS_WINDOW,
            issued: VecDeque::new(),
        }
    }

    /// Requests issued in the window ending at `now`.
    pub fn window_used(&self) -> usize {
        self.issued.len()
    }

    fn expire(&mut self, now: Duration) {
        while let Some(&t) = self.issued.front() {
            if t + self.window <= now {
                self.issued.pop_front();
            } else {
                break;
            }
        }
    }

    fn daily_exhausted(&self) -> bool {
        self.used_today >= self.daily_budget
    }

    fn window_full(&self) -> bool {
        self.issued.len() >= self.per_second_budget as usize
    }

    fn window_opens_at(&self) -> Duration {
        self.issued.front().map(|&t| t + self.window).unwrap_or_default()
    }
}

/// A granted request slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grant {
    pub key_index: usize,
    pub key_id: Option<String>,
    pub at: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Poll {
    Ready(Grant),
    WaitUntil(Duration),
    Exhausted,
}

#[derive(Debug)]
struct State {
    keys: Vec<ApiKey>,
    current: usize,
    day: u64,
}

#[derive(Debug)]
pub struct RateLimiter {
    state: Mutex<State>,
}

impl RateLimiter {
    pub fn new(keys: Vec<ApiKey>) -> Result<Self, GatewayError> {
        if keys.is_empty() {
            return Err(GatewayError::NoKeys);
        }
        Ok(RateLimiter {
            state: Mutex::new(State {
                keys,
                current: 0,
                day: 0,
            }),
        })
    }

    pub fn keyless() -> Self {
        Self::new(vec![ApiKey::keyless()]).expect("one key")
    }

    /// Limiter that never throttles; used for offline fixture replay.
    pub fn unlimited() -> Self {
        let mut key = ApiKey::keyless();
        key.per_second_budget = u32::MAX;
        Self::new(vec![key]).expect("one key")
    }

    /// Non-blocking attempt to take a slot at `now`.
    ///
    /// Starting at the current key, takes the first key (in round-robin
    /// order) with both budgets open. When every key with daily budget left
    /// has a full window, reports the earliest instant a window opens.
    pub fn poll(&self, now: Duration) -> Poll {
        let mut st = self.state.lock().expect("limiter poisoned");
        let today = now.as_secs() / DAY;
        if today != st.day {
            st.day = today;
            for k in &mut st.keys {
                k.used_today = 0;
            }
        }
        let n = st.keys.len();
        let mut earliest: Option<Duration> = None;
        for step in 0..n {
            let idx = (st.current + step) % n;
            let key = &mut st.keys[idx];
            key.expire(now);
            if key.daily_exhausted() {
                continue;
            }
            if key.window_full() {
                let open = key.window_opens_at();
                earliest = Some(earliest.map_or(open, |e| e.min(open)));
                continue;
            }
            key.issued.push_back(now);
            key.used_today += 1;
            let grant = Grant {
                key_index: idx,
                key_id: key.key_id.clone(),
                at: now,
            };
            st.current = idx;
            return Poll::Ready(grant);
        }
        match earliest {
            Some(t) => Poll::WaitUntil(t),
            None => Poll::Exhausted,
        }
    }

    /// Blocks on `clock` until a slot is available.
    pub fn acquire(&self, clock: &dyn Clock) -> Result<Grant, GatewayError> {
        loop {
            match self.poll(clock.now()) {
                Poll::Ready(g) => return Ok(g),
                Poll::WaitUntil(t) => clock.sleep_until(t),
                Poll::Exhausted => return Err(GatewayError::AllKeysExhausted),
            }
        }
    }

    /// Snapshot of per-key accounting.
    pub fn keys(&self) -> Vec<ApiKey> {
        self.state.lock().expect("limiter poisoned").keys.clone()
    }

    pub fn is_keyless(&self) -> bool {
        let st = self.state.lock().expect("limiter poisoned");
        st.keys.iter().all(|k| k.key_id.is_none())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::clock::SimClock;

    fn t(secs: f64) -> Duration {
        Duration::from_secs_f64(secs)
    }

    #[test]
    fn sixth_request_in_same_second_waits_for_next_second() {
        let clock = SimClock::new(t(1000.0));
        let lim = RateLimiter::new(vec![ApiKey::new("k1")]).unwrap();
        for _ in 0..5 {
            let g = lim.acquire(&clock).unwrap();
            assert_eq!(g.at, t(1000.0));
        }
        let g = lim.acquire(&clock).unwrap();
        assert_eq!(g.at, t(1001.0));
        assert_eq!(clock.now(), t(1001.0));
    }

    #[test]
    fn spent_daily_budget_is_exhausted() {
        let mut key = ApiKey::new("k1");
        key.used_today = key.daily_budget;
        let lim = RateLimiter::new(vec![key]).unwrap();
        // Day 0 so the counter is not reset.
        assert_eq!(lim.poll(t(10.0)), Poll::Exhausted);
        let clock = SimClock::new(t(10.0));
        assert!(matches!(lim.acquire(&clock), Err(GatewayError::AllKeysExhausted)));
    }

    #[test]
    fn rotates_to_second_key_after_daily_budget() {
        // 4 requests per second never fills a 5/s window, so only the daily
        // budget can force rotation.
        let clock = SimClock::new(t(0.0));
        let lim = RateLimiter::new(vec![ApiKey::new("k1"), ApiKey::new("k2")]).unwrap();
        let mut first_k2 = None;
        for i in 1..=100_001u64 {
            let g = lim.acquire(&clock).unwrap();
            if g.key_index == 1 && first_k2.is_none() {
                first_k2 = Some(i);
            }
            clock.advance(Duration::from_millis(250));
        }
        assert_eq!(first_k2, Some(100_001));
        let keys = lim.keys();
        assert_eq!(keys[0].used_today, 100_000);
        assert_eq!(keys[1].used_today, 1);
    }

    #[test]
    fn daily_counters_reset_at_day_boundary() {
        let clock = SimClock::new(t(100.0));
        let lim = RateLimiter::new(vec![ApiKey::with_budgets("k", 5, 2)]).unwrap();
        lim.acquire(&clock).unwrap();
        lim.acquire(&clock).unwrap();
        assert!(lim.acquire(&clock).is_err());
        clock.set(t(86_400.0));
        assert_eq!(lim.acquire(&clock).unwrap().key_index, 0);
    }

    #[test]
    fn keyless_allows_one_request_every_five_seconds() {
        let clock = SimClock::new(t(50.0));
        let lim = RateLimiter::keyless();
        assert!(lim.is_keyless());
        let a = lim.acquire(&clock).unwrap();
        let b = lim.acquire(&clock).unwrap();
        let c = lim.acquire(&clock).unwrap();
        assert_eq!(a.at, t(50.0));
        assert_eq!(b.at, t(55.0));
        assert_eq!(c.at, t(60.0));
        assert_eq!(a.key_id, None);
    }

    #[test]
    fn empty_key_list_rejected() {
        assert!(matches!(RateLimiter::new(vec![]), Err(GatewayError::NoKeys)));
    }

    #[test]
    fn sliding_window_holds_for_ten_thousand_acquisitions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let clock = SimClock::new(t(0.0));
        let lim = RateLimiter::new(vec![
            ApiKey::with_budgets("a", 5, 1_000_000),
            ApiKey::with_budgets("b", 3, 1_000_000),
        ])
        .unwrap();
        let mut log: Vec<Vec<Duration>> = vec![vec![], vec![]];
        for _ in 0..10_000 {
            let g = lim.acquire(&clock).unwrap();
            log[g.key_index].push(g.at);
            clock.advance(Duration::from_millis(rng.random_range(0..150)));
        }
        for (k, budget) in [(0usize, 5usize), (1, 3)] {
            let times = &log[k];
            for i in 0..times.len() {
                let in_window = times[i..]
                    .iter()
                    .take_while(|&&x| x < times[i] + Duration::from_secs(1))
                    .count();
                assert!(in_window <= budget, "key {k} exceeded window budget");
            }
        }
    }
}
