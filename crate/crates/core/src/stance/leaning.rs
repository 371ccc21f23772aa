use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Stance, StanceError, StancePort};
use crate::model::{AgentId, Snapshot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaningScore {
    pub agent_id: AgentId,
    /// Mean stance over relevant posts, in `[-1, 1]`.
    pub pi: f64,
    pub n_relevant_posts: usize,
    pub counts: BTreeMap<Stance, usize>,
}

/// Signed average stance toward humans; irrelevant posts are dropped.
pub fn human_leaning<'a>(
    agent_id: AgentId,
    posts: impl IntoIterator<Item = &'a str>,
    port: &dyn StancePort,
) -> Result<LeaningScore, StanceError> {
    let mut counts: BTreeMap<Stance, usize> = BTreeMap::new();
    let mut sum = 0i64;
    let mut n = 0usize;
    for text in posts {
        let s = port.stance(text)?;
        *counts.entry(s).or_default() += 1;
        if let Some(v) = s.value() {
            sum += v as i64;
            n += 1;
        }
    }
    if n == 0 {
        return Err(StanceError::NoRelevantPosts(agent_id.to_string()));
    }
    Ok(LeaningScore { agent_id, pi: sum as f64 / n as f64, n_relevant_posts: n, counts })
}

/// Leaning of every agent with at least one relevant post.
pub fn leaning_scores(snap: &Snapshot, port: &dyn StancePort) -> Result<BTreeMap<AgentId, LeaningScore>, StanceError> {
    let mut out = BTreeMap::new();
    for agent in snap.agents.keys() {
        match human_leaning(agent.clone(), snap.posts_by(agent).map(|p| p.text.as_str()), port) {
            Ok(s) => {
                out.insert(agent.clone(), s);
            }
            Err(StanceError::NoRelevantPosts(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

pub const DEFAULT_LEANING_BINS: usize = 21;

/// Scores at or beyond this magnitude count as polar.
pub const POLE: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaningDistribution {
    /// Bin lower edges over `[-1, 1]`.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Share of scores with `|π| >= 0.8`.
    pub mass_at_poles: f64,
    pub n: usize,
}

pub fn leaning_distribution(scores: &[f64], n_bins: usize) -> Result<LeaningDistribution, StanceError> {
    if scores.is_empty() {
        return Err(StanceError::NoScores);
    }
    if n_bins == 0 {
        return Err(StanceError::InvalidConfig("n_bins must be positive".into()));
    }
    let width = 2.0 / n_bins as f64;
    let mut counts = vec![0; n_bins];
    for &s in scores {
        if !(-1.0..=1.0).contains(&s) {
            return Err(StanceError::OutOfRange(s));
        }
        let i = (((s + 1.0) / width).floor() as usize).min(n_bins - 1);
        counts[i] += 1;
    }
    let polar = scores.iter().filter(|s| s.abs() >= POLE).count();
    Ok(LeaningDistribution {
        edges: (0..n_bins).map(|i| -1.0 + i as f64 * width).collect(),
        counts,
        mass_at_poles: polar as f64 / scores.len() as f64,
        n: scores.len(),
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::Rng;

    use super::*;

    struct Fixed;
    impl StancePort for Fixed {
        fn stance(&self, text: &str) -> Result<Stance, StanceError> {
            text.parse()
        }
    }

    fn pi(stances: &[&str]) -> f64 {
        human_leaning("a".into(), stances.iter().copied(), &Fixed).unwrap().pi
    }

    #[test]
    fn hand_means() {
        assert_eq!(pi(&["positive"; 3]), 1.0);
        assert_eq!(pi(&["positive", "negative"]), 0.0);
        assert!((pi(&["positive", "positive", "negative", "irrelevant"]) - 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            human_leaning("a".into(), ["irrelevant"], &Fixed),
            Err(StanceError::NoRelevantPosts(_))
        ));
    }

    #[test]
    fn distribution_examples() {
        let d = leaning_distribution(&[-1.0; 5], DEFAULT_LEANING_BINS).unwrap();
        assert_eq!(d.counts.iter().filter(|c| **c > 0).count(), 1);
        assert_eq!(d.counts[0], 5);
        assert_eq!(d.mass_at_poles, 1.0);
        assert_eq!(leaning_distribution(&[1.0], 21).unwrap().counts[20], 1);

        let mut rng = crate::util::rng(1);
        let u: Vec<f64> = (0..20_000).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let d = leaning_distribution(&u, 21).unwrap();
        assert!((d.mass_at_poles - 0.2).abs() < 0.05);
        assert_eq!(d.counts.iter().sum::<usize>(), u.len());
    }

    proptest! {
        #[test]
        fn order_invariant_and_bounded(mut v in proptest::collection::vec(0usize..4, 1..30)) {
            let names = ["positive", "negative", "neutral", "irrelevant"];
            v.push(0);
            let texts: Vec<&str> = v.iter().map(|i| names[*i]).collect();
            let a = human_leaning("a".into(), texts.iter().copied(), &Fixed).unwrap();
            let b = human_leaning("a".into(), texts.iter().rev().copied(), &Fixed).unwrap();
            prop_assert_eq!(a.pi, b.pi);
            prop_assert!((-1.0..=1.0).contains(&a.pi));
        }
    }
}
