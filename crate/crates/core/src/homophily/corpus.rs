use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::model::{AgentId, Snapshot, Timestamp};
use crate::text::{EncoderPort, TextError};

/// Every post encoded once, grouped by author in time order.
#[derive(Debug, Clone)]
pub struct EncodedCorpus {
    dim: usize,
    by_agent: BTreeMap<AgentId, Vec<(Timestamp, Vec<f64>)>>,
}

impl EncodedCorpus {
    pub fn build(snap: &Snapshot, enc: &dyn EncoderPort) -> Result<Self, TextError> {
        let posts: Vec<_> = snap.posts_in_order().collect();
        let vectors: Vec<Vec<f64>> = posts.par_iter().map(|p| enc.encode(&p.text)).collect::<Result<_, _>>()?;
        let mut by_agent: BTreeMap<AgentId, Vec<(Timestamp, Vec<f64>)>> = BTreeMap::new();
        for (p, v) in posts.into_iter().zip(vectors) {
            by_agent.entry(p.author_id.clone()).or_default().push((p.created_at, v));
        }
        for list in by_agent.values_mut() {
            list.sort_by_key(|(t, _)| *t);
        }
        Ok(Self { dim: enc.dim(), by_agent })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentId> + '_ {
        self.by_agent.keys()
    }

    pub fn posts(&self, agent: &AgentId) -> &[(Timestamp, Vec<f64>)] {
        self.by_agent.get(agent).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Mean encoding of posts with `from <= created_at < to`.
    pub fn mean_between(&self, agent: &AgentId, from: Timestamp, to: Timestamp) -> Option<Vec<f64>> {
        let posts = self.posts(agent);
        let lo = posts.partition_point(|(t, _)| *t < from);
        let hi = posts.partition_point(|(t, _)| *t < to);
        crate::text::mean_vector(posts[lo..hi.max(lo)].iter().map(|(_, v)| v.as_slice()), self.dim)
    }

    pub fn mean_all(&self, agent: &AgentId) -> Option<Vec<f64>> {
        self.mean_between(agent, Timestamp::MIN, Timestamp::MAX)
    }
}

/// Cosine for vectors already known to share a dimension.
pub(crate) fn cos(u: &[f64], v: &[f64]) -> f64 {
    crate::text::cosine_sim(u, v).expect("equal dimensions")
}
