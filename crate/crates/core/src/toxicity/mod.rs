//! Toxicity scoring, per-agent profiles, concentration, engagement and the
//! toxic/non-toxic network comparison.

mod engagement;
mod linguistic;
mod network;
mod profile;
mod scorer;

use thiserror::Error;

use crate::adapters::TransportError;
use crate::graph::GraphError;
use crate::stats::StatsError;

pub use engagement::{
    agent_mean_engagement, anova_engagement, compare_engagement, engagement_score, toxic_engagement,
    toxic_engagement_gap, EngagementComparison, EngagementGap, EngagementUnit,
};
pub use linguistic::{linguistic_comparison, FeatureComparison, FEATURES};
pub use network::{toxic_homophily, ToxicNetworkStats};
pub use profile::{bin_label, log2_bin, toxicity_concentration, toxicity_profiles, ToxicityProfile, DEFAULT_THRESHOLDS};
pub use scorer::{
    label_toxic, score_posts, LexiconScorer, PostScores, RemoteScorer, ScorerPort, DEFAULT_THRESHOLD, REMOTE_BATCH,
};

#[derive(Debug, Error)]
pub enum ToxicityError {
    #[error("toxic lexicon is empty")]
    EmptyLexicon,
    #[error("score {0} is outside [0, 1]")]
    InvalidScore(f64),
    #[error("post `{0}` has no score")]
    Unscored(String),
    #[error("agent `{0}` has no toxicity profile")]
    Unprofiled(String),
    #[error("no toxic posts")]
    NoToxicPosts,
    #[error("agent `{0}` has no posts")]
    NoPosts(String),
    #[error("no agent has both toxic and non-toxic posts")]
    NoEligibleAgents,
    #[error("threshold {threshold}: {toxic} toxic vs {nontoxic} non-toxic agents")]
    EmptyClass { threshold: u32, toxic: usize, nontoxic: usize },
    #[error("thresholds must be at least 1, got {0}")]
    InvalidThreshold(u32),
    #[error("{0} post set is empty")]
    EmptySet(&'static str),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
}
