use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::model::{mentions, AgentId, PostId, PostRecord, Snapshot, Timestamp};
use crate::util::Rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostDigest {
    pub post_id: PostId,
    pub author_id: AgentId,
    pub text: String,
    pub engagement: u64,
    pub created_at: Timestamp,
}

impl From<&PostRecord> for PostDigest {
    fn from(p: &PostRecord) -> Self {
        Self {
            post_id: p.post_id.clone(),
            author_id: p.author_id.clone(),
            text: p.text.clone(),
            engagement: p.engagement(),
            created_at: p.created_at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentDigest {
    pub agent_id: AgentId,
    pub display_name: String,
    /// Newest first.
    pub recent: Vec<PostDigest>,
}

/// What an agent sees before deciding.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub now: Timestamp,
    pub trending: Vec<PostDigest>,
    pub tagged: Vec<PostDigest>,
    pub search_results: Vec<PostDigest>,
    pub following: Vec<AgentDigest>,
    pub followers: Vec<AgentDigest>,
    /// Other agents surfaced by the platform (a seeded sample).
    pub suggestions: Vec<AgentDigest>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObservationConfig {
    /// Trending and tagged posts come from `[now - window_ms, now]`.
    pub window_ms: i64,
    pub top_n: usize,
    pub recent_per_agent: usize,
    pub max_followers: usize,
    pub suggestions: usize,
    pub search_limit: usize,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        Self {
            window_ms: 7 * 86_400_000,
            top_n: 10,
            recent_per_agent: 3,
            max_followers: 20,
            suggestions: 10,
            search_limit: 10,
        }
    }
}

fn digest(snap: &Snapshot, agent: &AgentId, recent: usize) -> Option<AgentDigest> {
    let rec = snap.agents.get(agent)?;
    Some(AgentDigest {
        agent_id: agent.clone(),
        display_name: rec.display_name.clone(),
        recent: snap.posts_by(agent).rev().take(recent).map(PostDigest::from).collect(),
    })
}

/// Top `top_n` posts in the window by engagement; ties go to the older post.
pub fn trending(snap: &Snapshot, window_ms: i64, top_n: usize) -> Vec<PostDigest> {
    trending_at(snap, snap.at, window_ms, top_n)
}

fn trending_at(snap: &Snapshot, now: Timestamp, window_ms: i64, top_n: usize) -> Vec<PostDigest> {
    let mut posts: Vec<(u64, Timestamp, &PostRecord)> =
        snap.recent_posts(now.saturating_sub(window_ms)).map(|p| (p.engagement(), p.created_at, p)).collect();
    let order = |a: &(u64, Timestamp, &PostRecord), b: &(u64, Timestamp, &PostRecord)| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then_with(|| a.2.post_id.cmp(&b.2.post_id));
    if top_n == 0 {
        return Vec::new();
    }
    if posts.len() > top_n {
        posts.select_nth_unstable_by(top_n - 1, order);
        posts.truncate(top_n);
    }
    posts.sort_by(order);
    posts.into_iter().map(|(_, _, p)| PostDigest::from(p)).collect()
}

/// Posts in the window by others that mention `@display_name` (case-insensitive), newest first.
pub fn tagged(snap: &Snapshot, agent: &AgentId, window_ms: i64, limit: usize) -> Vec<PostDigest> {
    tagged_at(snap, snap.at, agent, window_ms, limit)
}

fn tagged_at(snap: &Snapshot, now: Timestamp, agent: &AgentId, window_ms: i64, limit: usize) -> Vec<PostDigest> {
    let Some(name) = snap.agents.get(agent).map(|a| a.display_name.to_lowercase()) else {
        return Vec::new();
    };
    snap.recent_posts(now.saturating_sub(window_ms))
        .filter(|p| &p.author_id != agent && p.text.as_bytes().contains(&b'@'))
        .filter(|p| mentions(&p.text).iter().any(|m| m.to_lowercase() == name))
        .take(limit)
        .map(PostDigest::from)
        .collect()
}

/// Case-insensitive substring search over all posts, newest first.
pub fn search_posts(snap: &Snapshot, query: &str, limit: usize) -> Vec<PostDigest> {
    let q = query.to_lowercase();
    if q.is_empty() {
        return Vec::new();
    }
    snap.posts_in_order()
        .rev()
        .filter(|p| p.text.to_lowercase().contains(&q))
        .take(limit)
        .map(PostDigest::from)
        .collect()
}

/// Everything except suggestions, which need a random stream.
pub fn build_observation(snap: &Snapshot, agent: &AgentId, cfg: &ObservationConfig, query: Option<&str>) -> Observation {
    build_observation_at(snap, snap.at, agent, cfg, query)
}

/// As [`build_observation`], with the window ending at `now` instead of `snap.at`.
pub fn build_observation_at(
    snap: &Snapshot,
    now: Timestamp,
    agent: &AgentId,
    cfg: &ObservationConfig,
    query: Option<&str>,
) -> Observation {
    if !snap.agents.contains_key(agent) {
        return Observation { now, ..Default::default() };
    }
    Observation {
        now,
        trending: trending_at(snap, now, cfg.window_ms, cfg.top_n),
        tagged: tagged_at(snap, now, agent, cfg.window_ms, cfg.top_n),
        search_results: query.map(|q| search_posts(snap, q, cfg.search_limit)).unwrap_or_default(),
        following: snap.following(agent).filter_map(|a| digest(snap, a, cfg.recent_per_agent)).collect(),
        followers: snap
            .followers(agent)
            .take(cfg.max_followers)
            .filter_map(|a| digest(snap, a, cfg.recent_per_agent))
            .collect(),
        suggestions: Vec::new(),
    }
}

/// Uniform sample (without replacement) of up to `k` other agents.
pub fn sample_suggestions(snap: &Snapshot, agent: &AgentId, k: usize, recent: usize, rng: &mut Rng) -> Vec<AgentDigest> {
    let others: Vec<&AgentId> = snap.agents.keys().filter(|a| *a != agent).collect();
    let k = k.min(others.len());
    let mut picked: Vec<usize> = sample(rng, others.len(), k).into_vec();
    picked.sort_unstable();
    picked.into_iter().filter_map(|i| digest(snap, others[i], recent)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EventLog, EventPayload};

    fn log_with(posts: &[(&str, &str, u64)]) -> EventLog {
        let mut log = EventLog::new();
        for name in ["ann", "bob", "cy"] {
            log.record(
                0,
                EventPayload::AgentCreated { agent_id: name.into(), backstory: None, display_name: name.to_uppercase() },
            )
            .unwrap();
        }
        for (i, (author, text, likes)) in posts.iter().enumerate() {
            log.record(
                i as i64 + 1,
                EventPayload::Posted {
                    post_id: format!("p{i}").into(),
                    author_id: (*author).into(),
                    text: (*text).into(),
                    reply_to: None,
                    likes: Some(*likes),
                    views: None,
                    comments: None,
                },
            )
            .unwrap();
        }
        log
    }

    #[test]
    fn empty_platform_gives_empty_lists() {
        let log = log_with(&[]);
        let obs = build_observation(log.head(), &"ann".into(), &ObservationConfig::default(), Some("x"));
        assert!(obs.trending.is_empty() && obs.tagged.is_empty() && obs.search_results.is_empty());
        assert!(obs.following.is_empty() && obs.followers.is_empty());
    }

    #[test]
    fn trending_sorts_by_engagement() {
        let log = log_with(&[("ann", "a", 5), ("bob", "b", 3), ("cy", "c", 9)]);
        let t = trending(log.head(), 1_000, 2);
        let eng: Vec<u64> = t.iter().map(|p| p.engagement).collect();
        assert_eq!(eng, vec![9, 5]);
    }

    #[test]
    fn tagged_matches_linear_scan() {
        let texts = [
            ("bob", "hey @ann look", 0),
            ("cy", "@ANN! hi", 0),
            ("ann", "talking to myself @ann", 0),
            ("cy", "no tag here ann", 0),
            ("bob", "@annie is someone else", 0),
            ("cy", "email ann@site", 0),
        ];
        let log = log_with(&texts);
        let got: Vec<String> =
            tagged(log.head(), &"ann".into(), 1_000, 100).into_iter().map(|p| p.post_id.0).collect();
        let mut want = Vec::new();
        for (i, (author, text, _)) in texts.iter().enumerate().rev() {
            let hit = text.split_whitespace().any(|w| {
                let body: String = w.trim_start_matches('@').chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
                w.starts_with('@') && body.eq_ignore_ascii_case("ann")
            });
            if hit && *author != "ann" {
                want.push(format!("p{i}"));
            }
        }
        assert_eq!(got, want);
    }

    #[test]
    fn search_is_case_insensitive() {
        let log = log_with(&[("ann", "Rust is FUN", 0), ("bob", "nothing", 0)]);
        let r = search_posts(log.head(), "rust is fun", 10);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].post_id.as_str(), "p0");
    }

    #[test]
    fn suggestions_exclude_self() {
        let log = log_with(&[]);
        let mut rng = crate::util::rng(1);
        let s = sample_suggestions(log.head(), &"ann".into(), 10, 3, &mut rng);
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|d| d.agent_id.as_str() != "ann"));
    }
}
