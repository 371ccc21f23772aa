use std::sync::Arc;

use serde_json::{json, Value};

use super::preprocess::Normalizer;
use super::TextError;
use crate::adapters::{ContentCache, JsonTransport, TransportError};
use crate::util::{content_hash, fnv1a};

/// Maps text to a fixed-dimension vector. Same text, same vector.
pub trait EncoderPort: Send + Sync {
    fn dim(&self) -> usize;
    fn encode(&self, text: &str) -> Result<Vec<f64>, TextError>;
}

/// Feature-hashed bag of words, L2-normalized.
#[derive(Debug, Clone)]
pub struct HashedBowEncoder {
    dim: usize,
    seed: u64,
    normalizer: Normalizer,
}

pub const DEFAULT_DIM: usize = 256;

impl HashedBowEncoder {
    pub fn new(dim: usize, seed: u64) -> Result<Self, TextError> {
        Self::with_normalizer(dim, seed, Normalizer::default())
    }

    pub fn with_normalizer(dim: usize, seed: u64, normalizer: Normalizer) -> Result<Self, TextError> {
        if dim < 2 {
            return Err(TextError::InvalidDimension(dim));
        }
        Ok(Self { dim, seed, normalizer })
    }

    pub fn bucket_of(&self, token: &str) -> usize {
        (fnv1a(self.seed, token.as_bytes()) % self.dim as u64) as usize
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }
}

impl EncoderPort for HashedBowEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, text: &str) -> Result<Vec<f64>, TextError> {
        let mut v = vec![0.0; self.dim];
        for tok in self.normalizer.tokens(text) {
            v[self.bucket_of(&tok)] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(v)
    }
}

/// Remote sentence encoder: `POST {"texts": [...]}` -> `{"vectors": [[...], ...]}`.
/// Vectors are cached by content hash.
pub struct RemoteEncoder {
    url: String,
    dim: usize,
    transport: Arc<dyn JsonTransport>,
    cache: ContentCache,
}

impl RemoteEncoder {
    pub fn new(url: impl Into<String>, dim: usize, transport: Arc<dyn JsonTransport>, cache: ContentCache) -> Self {
        Self { url: url.into(), dim, transport, cache }
    }

    /// Fetch and cache vectors for every uncached text in one request.
    pub fn prefetch(&self, texts: &[&str]) -> Result<(), TextError> {
        let missing: Vec<&str> =
            texts.iter().copied().filter(|t| self.cache.get(&content_hash(t.as_bytes())).is_none()).collect();
        if missing.is_empty() {
            return Ok(());
        }
        let resp = self.transport.post_json(&self.url, &json!({ "texts": missing }))?;
        let vectors = resp
            .get("vectors")
            .and_then(Value::as_array)
            .filter(|v| v.len() == missing.len())
            .ok_or_else(|| TransportError::BadResponse("expected `vectors` matching request length".into()))?;
        for (text, vec) in missing.iter().zip(vectors) {
            let parsed = parse_vector(vec, self.dim)?;
            self.cache.insert(content_hash(text.as_bytes()), json!(parsed))?;
        }
        Ok(())
    }
}

fn parse_vector(v: &Value, dim: usize) -> Result<Vec<f64>, TextError> {
    let arr = v.as_array().ok_or_else(|| TransportError::BadResponse("vector is not an array".into()))?;
    if arr.len() != dim {
        return Err(TextError::DimensionMismatch(arr.len(), dim));
    }
    arr.iter()
        .map(|x| x.as_f64().ok_or_else(|| TransportError::BadResponse("non-numeric component".into()).into()))
        .collect()
}

impl EncoderPort for RemoteEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, text: &str) -> Result<Vec<f64>, TextError> {
        let key = content_hash(text.as_bytes());
        if self.cache.get(&key).is_none() {
            self.prefetch(&[text])?;
        }
        let cached = self.cache.get(&key).ok_or_else(|| TransportError::BadResponse("cache miss after fetch".into()))?;
        parse_vector(&cached, self.dim)
    }
}
