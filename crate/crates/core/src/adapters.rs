//! HTTP transport and on-disk caches used by the remote adapters.
//!
//! Every remote port (encoder, toxicity scorer, stance/persona labeler, LLM
//! policy) talks JSON over a [`JsonTransport`]. Tests substitute in-process
//! transports; nothing here is touched unless an adapter is configured.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("request to {url} failed: {message}")]
    Request { url: String, message: String },
    #[error("unexpected response shape: {0}")]
    BadResponse(String),
    #[error("cache i/o: {0}")]
    Cache(#[from] std::io::Error),
}

pub trait JsonTransport: Send + Sync {
    fn post_json(&self, url: &str, body: &Value) -> Result<Value, TransportError>;
}

/// Blocking HTTP transport. The bearer token is read from an environment
/// variable when the transport is built.
#[derive(Debug, Clone)]
pub struct HttpTransport {
    token: Option<String>,
    timeout: Duration,
}

impl HttpTransport {
    pub fn new(token_env: Option<&str>) -> Self {
        let token = token_env.and_then(|var| std::env::var(var).ok());
        Self { token, timeout: Duration::from_secs(60) }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

impl JsonTransport for HttpTransport {
    fn post_json(&self, url: &str, body: &Value) -> Result<Value, TransportError> {
        let agent: ureq::Agent =
            ureq::Agent::config_builder().timeout_global(Some(self.timeout)).build().into();
        let mut req = agent.post(url);
        if let Some(token) = &self.token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| TransportError::Request { url: url.to_owned(), message: e.to_string() })?;
        resp.body_mut()
            .read_json::<Value>()
            .map_err(|e| TransportError::Request { url: url.to_owned(), message: e.to_string() })
    }
}

/// Retry `f` up to `attempts` times with exponential backoff starting at `base`.
pub fn with_backoff<T>(
    attempts: usize,
    base: Duration,
    mut f: impl FnMut() -> Result<T, TransportError>,
) -> Result<T, TransportError> {
    let mut delay = base;
    let mut last = None;
    for i in 0..attempts.max(1) {
        match f() {
            Ok(v) => return Ok(v),
            Err(e) => {
                log::warn!("attempt {} failed: {e}", i + 1);
                last = Some(e);
                if i + 1 < attempts {
                    std::thread::sleep(delay);
                    delay *= 2;
                }
            }
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Append-only `content-hash -> JSON value` cache, one `hash\tjson` record per line.
#[derive(Debug, Default)]
pub struct ContentCache {
    path: Option<PathBuf>,
    entries: Mutex<BTreeMap<String, Value>>,
}

impl ContentCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Load existing records from `path` (if present); new records are appended.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, TransportError> {
        let path = path.as_ref().to_path_buf();
        let mut entries = BTreeMap::new();
        if path.exists() {
            let reader = BufReader::new(std::fs::File::open(&path)?);
            for line in reader.lines() {
                let line = line?;
                let Some((key, json)) = line.split_once('\t') else { continue };
                match serde_json::from_str(json) {
                    Ok(v) => {
                        entries.insert(key.to_owned(), v);
                    }
                    Err(e) => log::warn!("skipping corrupt cache record {key}: {e}"),
                }
            }
        }
        Ok(Self { path: Some(path), entries: Mutex::new(entries) })
    }

    pub fn get(&self, key: &str) -> Option<Value> {
        self.entries.lock().expect("cache lock").get(key).cloned()
    }

    pub fn insert(&self, key: String, value: Value) -> Result<(), TransportError> {
        let mut entries = self.entries.lock().expect("cache lock");
        if let Some(path) = &self.path {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(f, "{key}\t{value}")?;
        }
        entries.insert(key, value);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn cache_persists_between_opens() {
        let dir = std::env::temp_dir().join(format!("agentnet-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("scores.tsv");
        let _ = std::fs::remove_file(&path);
        {
            let c = ContentCache::open(&path).unwrap();
            c.insert("abc".into(), serde_json::json!(0.25)).unwrap();
        }
        let c = ContentCache::open(&path).unwrap();
        assert_eq!(c.get("abc"), Some(serde_json::json!(0.25)));
        assert_eq!(c.len(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn backoff_retries_until_success() {
        let calls = AtomicUsize::new(0);
        let out = with_backoff(3, Duration::from_millis(1), || {
            if calls.fetch_add(1, Ordering::SeqCst) < 2 {
                Err(TransportError::BadResponse("flaky".into()))
            } else {
                Ok(7)
            }
        });
        assert_eq!(out.unwrap(), 7);
        assert_eq!(calls.load(Ordering::SeqCst), 3);
    }
}
