//! Discrete-tick platform simulator with pluggable agent policies.

mod action;
mod config;
mod engine;
mod llm;
mod memory;
mod observation;
mod policy;
mod scripted;

use thiserror::Error;

pub use action::Action;
pub use config::{BackstoryTemplate, FixtureMode, GroupConfig, LlmConfig, PolicyConfig, SimConfig, DEFAULT_TICK_MS, DEFAULT_TOKEN_ENV};
pub use engine::{agent_id, build_population, completion_client, run_population, run_simulation, AgentSpec, Population, RunMetrics, SimOutput};
pub use llm::{
    build_prompt, parse_completion, CompletionPort, FixtureCompletion, HttpCompletion, LlmPolicy, RecordingCompletion,
    ScriptedCompletion,
};
pub use memory::{Memory, MemoryEntry, MemoryKind, DEFAULT_MEMORY_SIZE};
pub use observation::{
    build_observation, build_observation_at, sample_suggestions, search_posts, tagged, trending, AgentDigest, Observation,
    ObservationConfig, PostDigest,
};
pub use policy::{DecisionContext, FnPolicy, PolicyError, PolicyPort};
pub use scripted::{builtin_toxic_words, ActionMix, ScriptedParams, ScriptedPolicy, TopicLexicon};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("the simulation has no agents")]
    NoAgents,
    #[error("agent {agent} refers to policy #{index}, which does not exist")]
    UnknownPolicy { agent: String, index: usize },
    #[error("tick_ms = {tick_ms} leaves no room for {agents} agent turns per tick")]
    TickTooShort { tick_ms: i64, agents: usize },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("event log rejected agent creation: {0}")]
    Log(#[from] crate::model::LogError),
}
