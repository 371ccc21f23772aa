use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::corpus::cos;
use super::{HomophilyError, SimilaritySeries};
use crate::model::EventLog;
use crate::text::{jaccard_sim, precision_sim, EncoderPort, Normalizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftMeasure {
    Jaccard,
    Precision,
    Contextual,
}

impl DriftMeasure {
    pub const ALL: [DriftMeasure; 3] = [DriftMeasure::Jaccard, DriftMeasure::Precision, DriftMeasure::Contextual];

    pub fn name(self) -> &'static str {
        match self {
            DriftMeasure::Jaccard => "jaccard",
            DriftMeasure::Precision => "precision",
            DriftMeasure::Contextual => "contextual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriftConfig {
    /// Bucket width in ms of agent age at posting time.
    pub bucket_ms: i64,
    pub measures: Vec<DriftMeasure>,
    pub min_bucket_size: usize,
}

impl Default for DriftConfig {
    fn default() -> Self {
        Self { bucket_ms: 86_400_000, measures: DriftMeasure::ALL.to_vec(), min_bucket_size: 1 }
    }
}

/// Similarity between each agent's backstory and its posts, bucketed by the
/// agent's age when the post was written.
pub fn backstory_drift(
    log: &EventLog,
    normalizer: &Normalizer,
    enc: &dyn EncoderPort,
    cfg: &DriftConfig,
) -> Result<BTreeMap<DriftMeasure, SimilaritySeries>, HomophilyError> {
    if cfg.bucket_ms <= 0 {
        return Err(HomophilyError::InvalidConfig("bucket_ms must be positive".into()));
    }
    let snap = log.head();
    let mut sums: BTreeMap<DriftMeasure, BTreeMap<u64, (f64, usize)>> =
        cfg.measures.iter().map(|m| (*m, BTreeMap::new())).collect();
    let mut any = false;
    for agent in snap.agents.values() {
        let Some(backstory) = agent.backstory.as_deref() else { continue };
        let b_tokens = normalizer.token_set(backstory);
        let b_vec = if sums.contains_key(&DriftMeasure::Contextual) { Some(enc.encode(backstory)?) } else { None };
        for post in snap.posts_by(&agent.agent_id) {
            any = true;
            let bucket = ((post.created_at - agent.created_at).max(0) / cfg.bucket_ms) as u64;
            let p_tokens = normalizer.token_set(&post.text);
            for (m, by_bucket) in sums.iter_mut() {
                let sim = match m {
                    DriftMeasure::Jaccard => {
                        if b_tokens.is_empty() && p_tokens.is_empty() {
                            log::warn!("empty backstory and post token sets for {}", post.post_id);
                        }
                        Some(jaccard_sim(&b_tokens, &p_tokens))
                    }
                    DriftMeasure::Precision => precision_sim(&b_tokens, &p_tokens).ok(),
                    DriftMeasure::Contextual => {
                        Some(cos(b_vec.as_deref().expect("encoded above"), &enc.encode(&post.text)?))
                    }
                };
                if let Some(s) = sim {
                    let e = by_bucket.entry(bucket).or_insert((0.0, 0));
                    e.0 += s;
                    e.1 += 1;
                }
            }
        }
    }
    if !any {
        return Err(HomophilyError::NoBackstoryAgents);
    }
    Ok(sums.into_iter().map(|(m, s)| (m, SimilaritySeries::from_sums(m.name(), s, cfg.min_bucket_size))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EventPayload;
    use crate::text::HashedBowEncoder;

    fn log_with(backstory: Option<&str>, posts: &[(i64, &str)]) -> EventLog {
        let mut log = EventLog::new();
        log.record(
            100,
            EventPayload::AgentCreated { agent_id: "a".into(), backstory: backstory.map(Into::into), display_name: "a".into() },
        )
        .unwrap();
        for (i, (ts, text)) in posts.iter().enumerate() {
            log.record(
                *ts,
                EventPayload::Posted {
                    post_id: format!("p{i}").into(),
                    author_id: "a".into(),
                    text: (*text).into(),
                    reply_to: None,
                    likes: None,
                    views: None,
                    comments: None,
                },
            )
            .unwrap();
        }
        log
    }

    fn run(log: &EventLog) -> BTreeMap<DriftMeasure, SimilaritySeries> {
        let enc = HashedBowEncoder::new(64, 0).unwrap();
        let cfg = DriftConfig { bucket_ms: 10, ..Default::default() };
        backstory_drift(log, enc.normalizer(), &enc, &cfg).unwrap()
    }

    #[test]
    fn verbatim_posts_are_flat_at_one() {
        let b = "I love jazz and late night piano";
        let log = log_with(Some(b), &[(100, b), (115, b), (150, b)]);
        let r = run(&log);
        for m in [DriftMeasure::Jaccard, DriftMeasure::Precision, DriftMeasure::Contextual] {
            let means: Vec<f64> = r[&m].buckets.values().map(|s| s.mean).collect();
            assert_eq!(means.len(), 3);
            assert!(means.iter().all(|x| (x - 1.0).abs() < 1e-12), "{m:?} {means:?}");
        }
    }

    #[test]
    fn one_post_one_bucket() {
        let log = log_with(Some("jazz piano"), &[(125, "jazz drums")]);
        let r = run(&log);
        let s = &r[&DriftMeasure::Jaccard];
        assert_eq!(s.buckets.len(), 1);
        let (k, stat) = s.buckets.iter().next().unwrap();
        assert_eq!((*k, stat.n), (2, 1));
        // {jazz, piano} vs {jazz, drum}
        assert!((stat.mean - 1.0 / 3.0).abs() < 1e-12);
        assert!((r[&DriftMeasure::Precision].buckets[&2].mean - 0.5).abs() < 1e-12);
    }

    #[test]
    fn needs_backstories() {
        let log = log_with(None, &[(101, "x")]);
        let enc = HashedBowEncoder::new(64, 0).unwrap();
        assert!(matches!(
            backstory_drift(&log, enc.normalizer(), &enc, &DriftConfig::default()),
            Err(HomophilyError::NoBackstoryAgents)
        ));
    }

    #[test]
    fn stopword_only_posts_skip_precision() {
        let log = log_with(Some("jazz"), &[(101, "the and of")]);
        let r = run(&log);
        assert!(r[&DriftMeasure::Precision].buckets.is_empty());
        assert_eq!(r[&DriftMeasure::Jaccard].buckets[&0].mean, 0.0);
    }
}
