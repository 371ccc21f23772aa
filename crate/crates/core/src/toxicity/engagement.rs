use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PostScores, ToxicityError, ToxicityProfile};
use crate::model::{AgentId, PostRecord, Snapshot};
use crate::stats::{anova, welch_t, StatResult};

/// Likes + views + comments.
pub fn engagement_score(post: &PostRecord) -> u64 {
    post.engagement()
}

pub fn agent_mean_engagement(snap: &Snapshot, agent: &AgentId) -> Result<f64, ToxicityError> {
    let n = snap.post_count_by(agent);
    if n == 0 {
        return Err(ToxicityError::NoPosts(agent.to_string()));
    }
    Ok(snap.posts_by(agent).map(|p| p.engagement() as f64).sum::<f64>() / n as f64)
}

/// Welch's t test with Cohen's d.
pub fn compare_engagement(a: &[f64], b: &[f64]) -> Result<StatResult, ToxicityError> {
    Ok(welch_t(a, b)?)
}

/// One-way ANOVA with η².
pub fn anova_engagement(groups: &[&[f64]]) -> Result<StatResult, ToxicityError> {
    Ok(anova(groups)?)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngagementUnit {
    /// One value per agent: the mean over its posts.
    #[default]
    AgentMean,
    /// One value per post.
    Post,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementComparison {
    pub unit: EngagementUnit,
    pub mean_toxic: f64,
    pub mean_nontoxic: f64,
    pub n_toxic: usize,
    pub n_nontoxic: usize,
    /// Toxic minus non-toxic.
    pub test: StatResult,
}

/// Engagement of toxic agents (at least one toxic post) against the rest, or of
/// toxic against non-toxic posts.
pub fn toxic_engagement(
    snap: &Snapshot,
    profiles: &BTreeMap<AgentId, ToxicityProfile>,
    scores: &PostScores,
    unit: EngagementUnit,
) -> Result<EngagementComparison, ToxicityError> {
    let (mut toxic, mut clean) = (Vec::new(), Vec::new());
    match unit {
        EngagementUnit::AgentMean => {
            for p in profiles.values().filter(|p| p.n_posts > 0) {
                let m = agent_mean_engagement(snap, &p.agent_id)?;
                if p.n_toxic > 0 { toxic.push(m) } else { clean.push(m) }
            }
        }
        EngagementUnit::Post => {
            for post in snap.posts_in_order() {
                let e = post.engagement() as f64;
                match scores.is_toxic(&post.post_id) {
                    Some(true) => toxic.push(e),
                    Some(false) => clean.push(e),
                    None => return Err(ToxicityError::Unscored(post.post_id.to_string())),
                }
            }
        }
    }
    let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    Ok(EngagementComparison {
        unit,
        mean_toxic: mean(&toxic),
        mean_nontoxic: mean(&clean),
        n_toxic: toxic.len(),
        n_nontoxic: clean.len(),
        test: compare_engagement(&toxic, &clean)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementGap {
    /// Per agent: mean engagement on toxic posts minus on non-toxic posts.
    pub per_agent_gaps: BTreeMap<AgentId, f64>,
    pub frac_agents_higher_on_nontoxic: f64,
    pub frac_agents_higher_on_toxic: f64,
    /// Agents whose two means are equal; they count in neither fraction.
    pub n_equal: usize,
}

pub fn toxic_engagement_gap(snap: &Snapshot, scores: &PostScores) -> Result<EngagementGap, ToxicityError> {
    let mut gaps = BTreeMap::new();
    for agent in snap.agents.keys() {
        let (mut t, mut nt) = ((0.0, 0u32), (0.0, 0u32));
        for post in snap.posts_by(agent) {
            let e = post.engagement() as f64;
            let slot = match scores.is_toxic(&post.post_id) {
                Some(true) => &mut t,
                Some(false) => &mut nt,
                None => return Err(ToxicityError::Unscored(post.post_id.to_string())),
            };
            slot.0 += e;
            slot.1 += 1;
        }
        if t.1 > 0 && nt.1 > 0 {
            gaps.insert(agent.clone(), t.0 / t.1 as f64 - nt.0 / nt.1 as f64);
        }
    }
    if gaps.is_empty() {
        return Err(ToxicityError::NoEligibleAgents);
    }
    let n = gaps.len() as f64;
    let neg = gaps.values().filter(|g| **g < 0.0).count();
    let pos = gaps.values().filter(|g| **g > 0.0).count();
    Ok(EngagementGap {
        frac_agents_higher_on_nontoxic: neg as f64 / n,
        frac_agents_higher_on_toxic: pos as f64 / n,
        n_equal: gaps.len() - neg - pos,
        per_agent_gaps: gaps,
    })
}
