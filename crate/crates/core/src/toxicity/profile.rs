use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PostScores, ToxicityError};
use crate::model::{AgentId, Snapshot};

/// Toxic-post thresholds used for network comparisons.
pub const DEFAULT_THRESHOLDS: [u32; 3] = [1, 4, 8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToxicityProfile {
    pub agent_id: AgentId,
    pub n_toxic: u32,
    pub n_posts: u32,
    /// Mean score over the agent's posts; 0 without posts.
    pub mean_toxicity: f64,
    pub is_toxic_at: BTreeMap<u32, bool>,
}

impl ToxicityProfile {
    pub fn new(agent_id: AgentId, n_toxic: u32, n_posts: u32, mean_toxicity: f64, thresholds: &[u32]) -> Self {
        debug_assert!(n_toxic <= n_posts);
        let is_toxic_at = thresholds.iter().map(|&k| (k, n_toxic >= k)).collect();
        Self { agent_id, n_toxic, n_posts, mean_toxicity, is_toxic_at }
    }
}

/// One profile per agent in the snapshot, including agents without posts.
pub fn toxicity_profiles(
    snap: &Snapshot,
    scores: &PostScores,
    thresholds: &[u32],
) -> Result<BTreeMap<AgentId, ToxicityProfile>, ToxicityError> {
    snap.agents
        .keys()
        .map(|a| {
            let mut n_toxic = 0;
            let mut n_posts = 0;
            let mut sum = 0.0;
            for p in snap.posts_by(a) {
                let s = *scores.scores.get(&p.post_id).ok_or_else(|| ToxicityError::Unscored(p.post_id.to_string()))?;
                n_posts += 1;
                sum += s;
                if s > scores.threshold {
                    n_toxic += 1;
                }
            }
            let mean = if n_posts == 0 { 0.0 } else { sum / n_posts as f64 };
            Ok((a.clone(), ToxicityProfile::new(a.clone(), n_toxic, n_posts, mean, thresholds)))
        })
        .collect()
}

/// Lower bound of the power-of-two bin holding `count` (1, 2, 4, 8, ...).
pub fn log2_bin(count: u32) -> u32 {
    debug_assert!(count > 0);
    1 << (31 - count.leading_zeros())
}

/// Share of all toxic posts written by users in each `[2^k, 2^(k+1))` bin of
/// toxic-post count, keyed by the bin's lower bound.
pub fn toxicity_concentration<'a>(
    profiles: impl IntoIterator<Item = &'a ToxicityProfile>,
) -> Result<BTreeMap<u32, f64>, ToxicityError> {
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for p in profiles {
        if p.n_toxic > 0 {
            *counts.entry(log2_bin(p.n_toxic)).or_default() += p.n_toxic as u64;
        }
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(ToxicityError::NoToxicPosts);
    }
    Ok(counts.into_iter().map(|(b, c)| (b, c as f64 / total as f64)).collect())
}

/// `"1"`, `"2-3"`, `"4-7"`, ...
pub fn bin_label(lower: u32) -> String {
    if lower == 1 {
        "1".into()
    } else {
        format!("{}-{}", lower, lower * 2 - 1)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn prof(n_toxic: u32) -> ToxicityProfile {
        ToxicityProfile::new(AgentId::from(format!("a{n_toxic}")), n_toxic, n_toxic + 1, 0.0, &DEFAULT_THRESHOLDS)
    }

    #[test]
    fn bins() {
        let got: Vec<u32> = [1, 2, 3, 4, 7, 8, 15, 16].iter().map(|&c| log2_bin(c)).collect();
        assert_eq!(got, vec![1, 2, 2, 4, 4, 8, 8, 16]);
        assert_eq!(bin_label(4), "4-7");
    }

    #[test]
    fn hand_tabulated_shares() {
        let ps = [prof(1), prof(1), prof(2), prof(4), prof(0)];
        let c = toxicity_concentration(&ps).unwrap();
        assert_eq!(c, BTreeMap::from([(1, 0.25), (2, 0.25), (4, 0.5)]));
        let ones = [prof(1), prof(1)];
        assert_eq!(toxicity_concentration(&ones).unwrap(), BTreeMap::from([(1, 1.0)]));
        assert!(matches!(toxicity_concentration(&[prof(0)]), Err(ToxicityError::NoToxicPosts)));
    }

    #[test]
    fn thresholds_follow_counts() {
        let p = prof(4);
        assert_eq!(p.is_toxic_at, BTreeMap::from([(1, true), (4, true), (8, false)]));
    }

    proptest! {
        #[test]
        fn shares_sum_to_one_in_any_order(mut counts in proptest::collection::vec(0u32..200, 1..40)) {
            counts.push(1);
            let ps: Vec<ToxicityProfile> = counts.iter().map(|&c| prof(c)).collect();
            let a = toxicity_concentration(&ps).unwrap();
            prop_assert!((a.values().sum::<f64>() - 1.0).abs() < 1e-12);
            let b = toxicity_concentration(ps.iter().rev()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
