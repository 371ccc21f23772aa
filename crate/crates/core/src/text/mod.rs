//! Text encoding, normalization and similarity measures.

mod encoder;
mod preprocess;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapters::TransportError;
use crate::model::{AgentId, PostRecord};

pub use encoder::{EncoderPort, HashedBowEncoder, RemoteEncoder, DEFAULT_DIM};
pub use preprocess::{preprocess, IdentityStemmer, Normalizer, Stemmer, StopwordList, SuffixStemmer, TokenSet};

#[derive(Debug, Error)]
pub enum TextError {
    #[error("vector dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("encoder dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("no posts to encode")]
    NoPosts,
    #[error("post has no tokens after preprocessing")]
    EmptyPost,
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine_sim(u: &[f64], v: &[f64]) -> Result<f64, TextError> {
    if u.len() != v.len() {
        return Err(TextError::DimensionMismatch(u.len(), v.len()));
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

/// |B ∩ P| / |B ∪ P|. Two empty sets give 0 (logged).
pub fn jaccard_sim(b: &TokenSet, p: &TokenSet) -> f64 {
    if b.is_empty() && p.is_empty() {
        log::warn!("jaccard similarity of two empty token sets; returning 0");
        return 0.0;
    }
    let inter = b.0.intersection(&p.0).count();
    let union = b.len() + p.len() - inter;
    inter as f64 / union as f64
}

/// |B ∩ P| / |P|.
pub fn precision_sim(b: &TokenSet, p: &TokenSet) -> Result<f64, TextError> {
    if p.is_empty() {
        return Err(TextError::EmptyPost);
    }
    Ok(b.0.intersection(&p.0).count() as f64 / p.len() as f64)
}

/// Mean encoding of an agent's posts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentEncoding {
    pub agent_id: AgentId,
    pub vector: Vec<f64>,
    pub n_posts: usize,
}

pub fn agent_encoding<'a>(
    agent_id: &AgentId,
    posts: impl IntoIterator<Item = &'a PostRecord>,
    enc: &dyn EncoderPort,
) -> Result<AgentEncoding, TextError> {
    let mut sum = vec![0.0; enc.dim()];
    let mut n = 0usize;
    for p in posts {
        for (s, x) in sum.iter_mut().zip(enc.encode(&p.text)?) {
            *s += x;
        }
        n += 1;
    }
    if n == 0 {
        return Err(TextError::NoPosts);
    }
    sum.iter_mut().for_each(|s| *s /= n as f64);
    Ok(AgentEncoding { agent_id: agent_id.clone(), vector: sum, n_posts: n })
}

/// Element-wise mean of equal-length vectors; `None` if empty.
pub fn mean_vector<'a>(vectors: impl IntoIterator<Item = &'a [f64]>, dim: usize) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
        n += 1;
    }
    (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
}
