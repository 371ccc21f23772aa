use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{cos, EncodedCorpus};
use super::{HomophilyError, SimilaritySeries};
use crate::model::{AgentId, EventLog, EventPayload, Timestamp};
use crate::text::EncoderPort;

/// Agents are split by whether the follower has a backstory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cohort {
    WithBackstory,
    NoBackstory,
}

/// Which posts encode an agent for a bucket.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostWindowing {
    /// Posts inside the bucket only.
    #[default]
    Windowed,
    /// Posts from the start of the connection to the end of the bucket.
    Cumulative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceConfig {
    /// Bucket width in ms of connection age.
    pub bucket_ms: i64,
    pub min_bucket_size: usize,
    pub windowing: PostWindowing,
    pub max_buckets: Option<u64>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self { bucket_ms: 30 * 86_400_000, min_bucket_size: 5, windowing: PostWindowing::Windowed, max_buckets: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub cohorts: BTreeMap<Cohort, SimilaritySeries>,
    /// `mean(last bucket) / mean(first bucket)` per cohort.
    pub last_first_ratio: BTreeMap<Cohort, Option<f64>>,
    pub n_spells: usize,
}

struct Spell<'a> {
    follower: &'a AgentId,
    followee: &'a AgentId,
    start: Timestamp,
    end: Timestamp,
}

/// Follow spells `[start, end)`; open spells end just after the last event.
fn spells(log: &EventLog) -> Vec<Spell<'_>> {
    let horizon = log.last_timestamp().map_or(0, |t| t + 1);
    let mut open: BTreeMap<(&AgentId, &AgentId), Timestamp> = BTreeMap::new();
    let mut out = Vec::new();
    for e in log.events() {
        match &e.payload {
            EventPayload::Followed { follower_id, followee_id } => {
                open.insert((follower_id, followee_id), e.ts);
            }
            EventPayload::Unfollowed { follower_id, followee_id } => {
                if let Some(start) = open.remove(&(follower_id, followee_id)) {
                    out.push(Spell { follower: follower_id, followee: followee_id, start, end: e.ts });
                }
            }
            _ => {}
        }
    }
    out.extend(open.into_iter().map(|((f, g), start)| Spell { follower: f, followee: g, start, end: horizon }));
    out
}

/// Similarity of connected pairs as a function of how long they have been
/// connected. Bucket `k` covers connection ages `[k, k + 1) * bucket_ms`.
pub fn neighbor_convergence(
    log: &EventLog,
    enc: &dyn EncoderPort,
    cfg: &ConvergenceConfig,
) -> Result<ConvergenceReport, HomophilyError> {
    if cfg.bucket_ms <= 0 {
        return Err(HomophilyError::InvalidConfig("bucket_ms must be positive".into()));
    }
    let spells = spells(log);
    if spells.is_empty() {
        return Err(HomophilyError::NoEdges);
    }
    let snap = log.head();
    let corpus = EncodedCorpus::build(snap, enc)?;
    let cohort_of = |a: &AgentId| match snap.agents.get(a).and_then(|r| r.backstory.as_ref()) {
        Some(_) => Cohort::WithBackstory,
        None => Cohort::NoBackstory,
    };

    let samples: Vec<Vec<(Cohort, u64, f64)>> = spells
        .par_iter()
        .map(|s| {
            let cohort = cohort_of(s.follower);
            let mut out = Vec::new();
            let mut k = 0u64;
            while s.start + k as i64 * cfg.bucket_ms < s.end && cfg.max_buckets.map_or(true, |m| k < m) {
                let lo = s.start + k as i64 * cfg.bucket_ms;
                let hi = (lo + cfg.bucket_ms).min(s.end);
                let from = match cfg.windowing {
                    PostWindowing::Windowed => lo,
                    PostWindowing::Cumulative => s.start,
                };
                if let (Some(a), Some(b)) =
                    (corpus.mean_between(s.follower, from, hi), corpus.mean_between(s.followee, from, hi))
                {
                    out.push((cohort, k, cos(&a, &b)));
                }
                k += 1;
            }
            out
        })
        .collect();

    let mut sums: BTreeMap<Cohort, BTreeMap<u64, (f64, usize)>> = BTreeMap::new();
    for (cohort, k, sim) in samples.into_iter().flatten() {
        let e = sums.entry(cohort).or_default().entry(k).or_insert((0.0, 0));
        e.0 += sim;
        e.1 += 1;
    }
    let cohorts: BTreeMap<Cohort, SimilaritySeries> = sums
        .into_iter()
        .map(|(c, s)| (c, SimilaritySeries::from_sums("contextual", s, cfg.min_bucket_size)))
        .collect();
    let last_first_ratio = cohorts.iter().map(|(c, s)| (*c, s.last_first_ratio())).collect();
    Ok(ConvergenceReport { cohorts, last_first_ratio, n_spells: spells.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::HashedBowEncoder;

    fn rec(log: &mut EventLog, ts: Timestamp, p: EventPayload) {
        log.record(ts, p).unwrap();
    }

    fn post(log: &mut EventLog, ts: Timestamp, author: &str, text: &str) {
        let id = format!("p{}", log.len());
        rec(
            log,
            ts,
            EventPayload::Posted {
                post_id: id.into(),
                author_id: author.into(),
                text: text.into(),
                reply_to: None,
                likes: None,
                views: None,
                comments: None,
            },
        );
    }

    fn base() -> EventLog {
        let mut log = EventLog::new();
        for (id, b) in [("a", Some("bio")), ("b", None), ("c", None)] {
            rec(
                &mut log,
                0,
                EventPayload::AgentCreated { agent_id: id.into(), backstory: b.map(Into::into), display_name: id.into() },
            );
        }
        log
    }

    #[test]
    fn short_spell_only_in_first_bucket() {
        let mut log = base();
        rec(&mut log, 10, EventPayload::Followed { follower_id: "b".into(), followee_id: "c".into() });
        post(&mut log, 11, "b", "cat");
        post(&mut log, 12, "c", "cat dog");
        rec(&mut log, 15, EventPayload::Unfollowed { follower_id: "b".into(), followee_id: "c".into() });
        post(&mut log, 25, "b", "cat");
        post(&mut log, 26, "c", "cat");
        let enc = HashedBowEncoder::new(64, 0).unwrap();
        let cfg = ConvergenceConfig { bucket_ms: 10, min_bucket_size: 1, ..Default::default() };
        let r = neighbor_convergence(&log, &enc, &cfg).unwrap();
        let s = &r.cohorts[&Cohort::NoBackstory];
        assert_eq!(s.buckets.keys().copied().collect::<Vec<_>>(), vec![0]);
        let want = cos(&enc.encode("cat").unwrap(), &enc.encode("cat dog").unwrap());
        assert!((s.buckets[&0].mean - want).abs() < 1e-12);
        assert!(!r.cohorts.contains_key(&Cohort::WithBackstory));
    }

    #[test]
    fn windowed_and_cumulative_buckets() {
        let mut log = base();
        rec(&mut log, 0, EventPayload::Followed { follower_id: "a".into(), followee_id: "b".into() });
        post(&mut log, 1, "a", "cat");
        post(&mut log, 2, "b", "dog");
        post(&mut log, 11, "a", "dog");
        post(&mut log, 12, "b", "dog");
        let enc = HashedBowEncoder::new(64, 0).unwrap();
        let mut cfg = ConvergenceConfig { bucket_ms: 10, min_bucket_size: 1, ..Default::default() };
        let r = neighbor_convergence(&log, &enc, &cfg).unwrap();
        let s = &r.cohorts[&Cohort::WithBackstory];
        let cat = enc.encode("cat").unwrap();
        let dog = enc.encode("dog").unwrap();
        assert!((s.buckets[&0].mean - cos(&cat, &dog)).abs() < 1e-12);
        assert!((s.buckets[&1].mean - 1.0).abs() < 1e-12);
        assert_eq!(r.last_first_ratio[&Cohort::WithBackstory], s.last_first_ratio());

        cfg.windowing = PostWindowing::Cumulative;
        let r = neighbor_convergence(&log, &enc, &cfg).unwrap();
        let mixed: Vec<f64> = cat.iter().zip(&dog).map(|(x, y)| (x + y) / 2.0).collect();
        let want = cos(&mixed, &dog);
        assert!((r.cohorts[&Cohort::WithBackstory].buckets[&1].mean - want).abs() < 1e-12);
    }

    #[test]
    fn no_edges() {
        let log = base();
        let enc = HashedBowEncoder::new(64, 0).unwrap();
        assert!(matches!(
            neighbor_convergence(&log, &enc, &ConvergenceConfig::default()),
            Err(HomophilyError::NoEdges)
        ));
    }
}
