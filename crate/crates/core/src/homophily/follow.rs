use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::corpus::{cos, EncodedCorpus};
use super::{HomophilyError, Window};
use crate::model::{AgentId, EventLog, EventPayload, Timestamp};
use crate::text::EncoderPort;
use crate::util::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FollowConfig {
    pub window: Window,
    /// Cap on the non-connected agents compared per agent and window.
    pub max_nonneighbor_sample: usize,
    pub seed: u64,
}

impl Default for FollowConfig {
    fn default() -> Self {
        Self { window: Window::CalendarMonth, max_nonneighbor_sample: 1000, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStat {
    /// Mean over agents of `S_t / S̄_t`.
    pub mean_ratio: f64,
    pub n_agents: usize,
    pub n_follows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowHomophilyReport {
    /// Keyed by window start.
    pub per_window: BTreeMap<Timestamp, WindowStat>,
    /// Mean over all (agent, window) ratios.
    pub overall_mean: f64,
    pub max_nonneighbor_sample: usize,
    pub seed: u64,
}

/// Similarity of agents to the accounts they start following in a window,
/// relative to accounts they are not connected to. Encodings use only posts
/// written before the window starts.
pub fn individual_follow_homophily(
    log: &EventLog,
    enc: &dyn EncoderPort,
    cfg: &FollowConfig,
) -> Result<FollowHomophilyReport, HomophilyError> {
    cfg.window.validate()?;
    if cfg.max_nonneighbor_sample == 0 {
        return Err(HomophilyError::InvalidConfig("max_nonneighbor_sample must be positive".into()));
    }
    // window start -> (end, follower -> followees)
    let mut windows: BTreeMap<Timestamp, (Timestamp, BTreeMap<&AgentId, BTreeSet<&AgentId>>)> = BTreeMap::new();
    for e in log.events() {
        if let EventPayload::Followed { follower_id, followee_id } = &e.payload {
            let (start, end) = cfg.window.bounds(e.ts);
            windows.entry(start).or_insert_with(|| (end, BTreeMap::new())).1.entry(follower_id).or_default().insert(followee_id);
        }
    }
    if windows.is_empty() {
        return Err(HomophilyError::NoFollowEvents);
    }
    let corpus = EncodedCorpus::build(log.head(), enc)?;

    let mut per_window = BTreeMap::new();
    let mut all_ratios = Vec::new();
    for (&start, (end, follows)) in &windows {
        let snap = log.snapshot_at(end - 1);
        let vectors: BTreeMap<&AgentId, Vec<f64>> = snap
            .agents
            .keys()
            .filter_map(|a| corpus.mean_between(a, Timestamp::MIN, start).map(|v| (a, v)))
            .collect();
        let mut ratios = Vec::new();
        let mut n_follows = 0;
        for (&f, followees) in follows {
            let Some(vf) = vectors.get(f) else { continue };
            let sims: Vec<f64> = followees.iter().filter_map(|g| vectors.get(*g)).map(|vg| cos(vf, vg)).collect();
            if sims.is_empty() {
                continue;
            }
            let pool: Vec<&Vec<f64>> = vectors
                .iter()
                .filter(|(a, _)| {
                    **a != f && !followees.contains(**a) && !snap.is_following(f, a) && !snap.is_following(a, f)
                })
                .map(|(_, v)| v)
                .collect();
            if pool.is_empty() {
                continue;
            }
            let k = pool.len().min(cfg.max_nonneighbor_sample);
            let mut rng = substream(cfg.seed, &format!("follow/{start}/{f}"));
            let s_bar = sample(&mut rng, pool.len(), k).iter().map(|i| cos(vf, pool[i])).sum::<f64>() / k as f64;
            if s_bar == 0.0 {
                continue;
            }
            let s = sims.iter().sum::<f64>() / sims.len() as f64;
            n_follows += sims.len();
            ratios.push(s / s_bar);
        }
        if !ratios.is_empty() {
            per_window.insert(
                start,
                WindowStat { mean_ratio: ratios.iter().sum::<f64>() / ratios.len() as f64, n_agents: ratios.len(), n_follows },
            );
            all_ratios.extend(ratios);
        }
    }
    if all_ratios.is_empty() {
        return Err(HomophilyError::ZeroBaseline);
    }
    Ok(FollowHomophilyReport {
        per_window,
        overall_mean: all_ratios.iter().sum::<f64>() / all_ratios.len() as f64,
        max_nonneighbor_sample: cfg.max_nonneighbor_sample,
        seed: cfg.seed,
    })
}
