//! Response cache keyed by store version, so a write makes every earlier
//! payload unreachable.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq)]
pub struct Cached {
    pub content_type: &'static str,
    pub body: String,
}

pub struct TtlCache {
    ttl: Duration,
    inner: Mutex<Inner>,
}

#[derive(Default)]
struct Inner {
    version: u64,
    items: HashMap<String, (Instant, Cached)>,
}

impl TtlCache {
    pub fn new(ttl: Duration) -> Self {
        TtlCache {
            ttl,
            inner: Mutex::new(Inner::default()),
        }
    }

    /// Drops everything cached for an older store version.
    fn roll(inner: &mut Inner, version: u64) {
        if inner.version != version {
            inner.items.clear();
            inner.version = version;
        }
    }

    pub fn get(&self, version: u64, key: &str) -> Option<Cached> {
        if self.ttl.is_zero() {
            return None;
        }
        let mut inner = self.inner.lock().expect("cache lock poisoned");
        if inner.version != version {
            return None;
        }
        match inner.items.get(key) {
            Some((at, c)) if at.elapsed() < self.ttl => Some(c.clone()),
            Some(_) => {
                inner.items.remove(key);
                None
            }
            None => None,
        }
    }

    /// Stores `value` computed from snapshot `version`. Values computed
    /// from a snapshot older than the newest one seen are discarded.
    pub fn put(&self, version: u64, key: String, value: Cached) {
        if self.ttl.is_zero() {
            return;
        }
        let mut inner = self.inner.lock().expect("cache lock poisoned");
        if version < inner.version {
            return;
        }
        Self::roll(&mut inner, version);
        inner.items.insert(key, (Instant::now(), value));
    }

    /// Called after a committed write.
    pub fn invalidate(&self, version: u64) {
        let mut inner = self.inner.lock().expect("cache lock poisoned");
        if version > inner.version {
            Self::roll(&mut inner, version);
        }
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock poisoned").items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Cached {
        Cached {
            content_type: "application/json",
            body: s.into(),
        }
    }

    #[test]
    fn version_change_hides_old_payloads() {
        let cache = TtlCache::new(Duration::from_secs(60));
        cache.put(1, "a".into(), c("one"));
        assert_eq!(cache.get(1, "a"), Some(c("one")));
        assert_eq!(cache.get(2, "a"), None);
        cache.invalidate(2);
        assert!(cache.is_empty());
        // A slow request finishing against version 1 cannot repopulate.
        cache.put(1, "a".into(), c("stale"));
        assert_eq!(cache.get(1, "a"), None);
        assert!(cache.is_empty());
    }

    #[test]
    fn entries_expire() {
        let cache = TtlCache::new(Duration::from_millis(20));
        cache.put(1, "a".into(), c("one"));
        std::thread::sleep(Duration::from_millis(40));
        assert_eq!(cache.get(1, "a"), None);
        let off = TtlCache::new(Duration::ZERO);
        off.put(1, "a".into(), c("one"));
        assert_eq!(off.get(1, "a"), None);
    }
}
