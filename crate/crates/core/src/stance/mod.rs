//! Stance toward humans, political ideology labeling and polarization.

mod ideology;
mod leaning;
mod polarization;
mod ports;

use thiserror::Error;

use crate::adapters::TransportError;
use crate::graph::GraphError;

pub use ideology::{
    apply_adjudications, ideological_subgraph, ideology_pipeline, ideology_score, majority, majority_vote_label,
    political_filter, read_adjudications, write_adjudication_csv, FinalLabel, IdeologicalSubgraph, IdeologyLabel,
    IdeologyRun, IdeologyScore, PoliticalKeywords, PoliticalPost,
};
pub use leaning::{
    human_leaning, leaning_distribution, leaning_scores, LeaningDistribution, LeaningScore, DEFAULT_LEANING_BINS, POLE,
};
pub use polarization::{node_polarization, polarization_suite, FollowDirection, PolarizationConfig, PolarizationReport};
pub use ports::{
    ideology_prompt, stance_prompt, IdeologyClass, LexiconPersona, LexiconStance, Persona, PersonaPort, RemoteLabeler,
    Stance, StancePort,
};

/// Classifier prompt for stance toward humans; `{text}` is substituted.
pub const STANCE_PROMPT: &str = include_str!("../../resources/stance_prompt.txt");
/// Persona classifier prompt; `{ideology}` and `{text}` are substituted.
pub const IDEOLOGY_PROMPT: &str = include_str!("../../resources/ideology_prompt.txt");

/// Agents need this many political posts to enter the ideological subgraph.
pub const DEFAULT_MIN_POSTS: usize = 5;
pub const DEFAULT_MIN_ABS_SCORE: f64 = 0.25;

#[derive(Debug, Error)]
pub enum StanceError {
    #[error("agent `{0}` has no relevant posts")]
    NoRelevantPosts(String),
    #[error("agent `{0}` has no labeled political posts")]
    NoLabeledPosts(String),
    #[error("no scores to summarize")]
    NoScores,
    #[error("score {0} is outside [-1, 1]")]
    OutOfRange(f64),
    #[error("keyword list is empty")]
    EmptyKeywordList,
    #[error("cannot parse classifier answer `{0}`")]
    UnparseableLabel(String),
    #[error("no agents qualify for the ideological subgraph")]
    EmptySubgraph,
    #[error("one ideology class is empty")]
    EmptyClass,
    #[error("no node has a neighbor to measure polarization")]
    NoEligibleNodes,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}
