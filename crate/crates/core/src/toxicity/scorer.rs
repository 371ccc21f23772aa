use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::ToxicityError;
use crate::adapters::{with_backoff, ContentCache, JsonTransport, TransportError};
use crate::model::{PostId, Snapshot};
use crate::util::content_hash;

/// Score threshold above which a post counts as toxic.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Largest batch sent to a remote scorer in one request.
pub const REMOTE_BATCH: usize = 16;

pub trait ScorerPort: Send + Sync {
    /// Toxicity in `[0, 1]`.
    fn score(&self, text: &str) -> Result<f64, ToxicityError>;

    fn score_batch(&self, texts: &[&str]) -> Result<Vec<f64>, ToxicityError> {
        texts.iter().map(|t| self.score(t)).collect()
    }
}

/// Offline scorer: `min(1, 4 * hits / max(1, words))` over whitespace words.
#[derive(Debug, Clone)]
pub struct LexiconScorer {
    words: BTreeSet<String>,
}

const BUILTIN: &str = include_str!("../../data/toxic_words.txt");

impl LexiconScorer {
    pub fn new<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Result<Self, ToxicityError> {
        let words: BTreeSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty() && !w.starts_with('#'))
            .collect();
        if words.is_empty() {
            return Err(ToxicityError::EmptyLexicon);
        }
        Ok(Self { words })
    }

    /// One token per line; blank lines and `#` comments are skipped.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ToxicityError> {
        Self::new(std::fs::read_to_string(path)?.lines())
    }

    pub fn builtin() -> Self {
        Self::new(BUILTIN.lines()).expect("bundled lexicon is non-empty")
    }

    pub fn hits(&self, text: &str) -> (usize, usize) {
        let mut words = 0;
        let mut hits = 0;
        for w in text.split_whitespace() {
            words += 1;
            let bare = w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
            if self.words.contains(&bare) {
                hits += 1;
            }
        }
        (hits, words)
    }
}

impl ScorerPort for LexiconScorer {
    fn score(&self, text: &str) -> Result<f64, ToxicityError> {
        let (hits, words) = self.hits(text);
        Ok((hits as f64 / words.max(1) as f64 * 4.0).min(1.0))
    }
}

/// HTTP scorer: POST `{texts: [...]}` answered by `{scores: [...]}`. Scores are
/// cached by content hash, so reruns never repeat a request.
pub struct RemoteScorer {
    url: String,
    transport: Arc<dyn JsonTransport>,
    cache: ContentCache,
    attempts: usize,
    backoff: Duration,
}

impl RemoteScorer {
    pub fn new(url: impl Into<String>, transport: Arc<dyn JsonTransport>, cache: ContentCache) -> Self {
        Self { url: url.into(), transport, cache, attempts: 3, backoff: Duration::from_millis(500) }
    }

    pub fn with_retries(mut self, attempts: usize, backoff: Duration) -> Self {
        self.attempts = attempts;
        self.backoff = backoff;
        self
    }

    fn fetch(&self, texts: &[&str]) -> Result<(), ToxicityError> {
        let mut missing: Vec<&str> =
            texts.iter().copied().filter(|t| self.cache.get(&content_hash(t.as_bytes())).is_none()).collect();
        missing.sort_unstable();
        missing.dedup();
        for chunk in missing.chunks(REMOTE_BATCH) {
            let body = json!({ "texts": chunk });
            let resp = with_backoff(self.attempts, self.backoff, || self.transport.post_json(&self.url, &body))?;
            let scores = resp
                .get("scores")
                .and_then(Value::as_array)
                .filter(|s| s.len() == chunk.len())
                .ok_or_else(|| TransportError::BadResponse("expected `scores` matching request length".into()))?;
            for (text, s) in chunk.iter().zip(scores) {
                let s = s.as_f64().ok_or_else(|| TransportError::BadResponse("non-numeric score".into()))?;
                check_score(s)?;
                self.cache.insert(content_hash(text.as_bytes()), json!(s))?;
            }
        }
        Ok(())
    }

    fn cached(&self, text: &str) -> Result<f64, ToxicityError> {
        self.cache
            .get(&content_hash(text.as_bytes()))
            .and_then(|v| v.as_f64())
            .ok_or_else(|| TransportError::BadResponse("cache miss after fetch".into()).into())
    }
}

impl ScorerPort for RemoteScorer {
    fn score(&self, text: &str) -> Result<f64, ToxicityError> {
        self.fetch(&[text])?;
        self.cached(text)
    }

    fn score_batch(&self, texts: &[&str]) -> Result<Vec<f64>, ToxicityError> {
        self.fetch(texts)?;
        texts.iter().map(|t| self.cached(t)).collect()
    }
}

fn check_score(s: f64) -> Result<f64, ToxicityError> {
    if (0.0..=1.0).contains(&s) {
        Ok(s)
    } else {
        Err(ToxicityError::InvalidScore(s))
    }
}

/// Strictly above the threshold.
pub fn label_toxic(text: &str, scorer: &dyn ScorerPort, threshold: f64) -> Result<bool, ToxicityError> {
    Ok(check_score(scorer.score(text)?)? > threshold)
}

/// Scores for every post in the snapshot.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PostScores {
    pub scores: std::collections::BTreeMap<PostId, f64>,
    pub threshold: f64,
}

impl PostScores {
    pub fn is_toxic(&self, post: &PostId) -> Option<bool> {
        self.scores.get(post).map(|s| *s > self.threshold)
    }
}

pub fn score_posts(snap: &Snapshot, scorer: &dyn ScorerPort, threshold: f64) -> Result<PostScores, ToxicityError> {
    let posts: Vec<_> = snap.posts_in_order().collect();
    let texts: Vec<&str> = posts.iter().map(|p| p.text.as_str()).collect();
    let values: Vec<f64> = texts
        .par_chunks(256)
        .map(|chunk| scorer.score_batch(chunk))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .map(check_score)
        .collect::<Result<_, _>>()?;
    Ok(PostScores { scores: posts.iter().map(|p| p.post_id.clone()).zip(values).collect(), threshold })
}
