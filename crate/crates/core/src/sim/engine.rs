use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::action::Action;
use super::config::{FixtureMode, LlmConfig, PolicyConfig, SimConfig};
use super::llm::{CompletionPort, FixtureCompletion, HttpCompletion, LlmPolicy, RecordingCompletion};
use super::memory::{Memory, MemoryEntry, MemoryKind};
use super::observation::{build_observation_at, sample_suggestions, search_posts, Observation, PostDigest};
use super::policy::{DecisionContext, PolicyError, PolicyPort};
use super::scripted::{builtin_toxic_words, ScriptedPolicy, TopicLexicon};
use super::SimError;
use crate::adapters::HttpTransport;
use crate::model::{AgentId, EventLog, EventPayload, PostId, Timestamp};
use crate::util::{fnv1a, substream};

/// One agent to be created.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentSpec {
    pub agent_id: AgentId,
    pub display_name: String,
    pub backstory: Option<String>,
    /// Index into the population's policies.
    pub policy: usize,
    pub created_tick: u64,
}

pub struct Population {
    pub agents: Vec<AgentSpec>,
    pub policies: Vec<Box<dyn PolicyPort>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub decisions: u64,
    pub noops: u64,
    /// Actions that referenced missing entities or broke a log invariant.
    pub skipped_invalid: u64,
    pub parse_fallbacks: u64,
    /// Executed actions by verb.
    pub actions: BTreeMap<String, u64>,
}

pub struct SimOutput {
    pub log: EventLog,
    pub metrics: RunMetrics,
}

pub fn agent_id(i: usize) -> AgentId {
    AgentId(format!("agent-{:04}", i + 1))
}

fn build_policy(cfg: &SimConfig, group: usize, policy: &PolicyConfig, lexicon: &Arc<TopicLexicon>, toxic: &Arc<Vec<String>>) -> Result<Box<dyn PolicyPort>, SimError> {
    Ok(match policy {
        PolicyConfig::Scripted(p) => {
            let mut p = p.clone();
            p.seed = p.seed.wrapping_add(fnv1a(cfg.seed, &(group as u64).to_le_bytes()));
            Box::new(ScriptedPolicy::new(p, lexicon.clone(), toxic.clone())?)
        }
        PolicyConfig::Llm(l) => {
            let client = completion_client(l)?;
            Box::new(LlmPolicy::new(client).with_retries(l.retries))
        }
    })
}

/// Completion client for `l.mode`: live HTTP, recording, or fixture replay.
pub fn completion_client(l: &LlmConfig) -> Result<Box<dyn CompletionPort>, SimError> {
    let live = || -> Result<HttpCompletion, SimError> {
        if l.url.is_empty() {
            return Err(PolicyError::InvalidParams("llm policy needs a url".into()).into());
        }
        let transport = Arc::new(HttpTransport::new(Some(&l.token_env)));
        let mut c = HttpCompletion::new(&l.url, &l.model, transport);
        c.max_tokens = l.max_tokens;
        Ok(c)
    };
    let fixtures = || {
        l.fixtures
            .clone()
            .ok_or_else(|| SimError::from(PolicyError::InvalidParams("fixture mode needs a fixtures dir".into())))
    };
    Ok(match l.mode {
        FixtureMode::Live => Box::new(live()?),
        FixtureMode::Record => Box::new(RecordingCompletion::new(live()?, fixtures()?)),
        FixtureMode::Replay => Box::new(FixtureCompletion::new(fixtures()?)),
    })
}

/// Policies per group and agents with ids, display names and backstories.
pub fn build_population(cfg: &SimConfig) -> Result<Population, SimError> {
    if cfg.n_agents() == 0 {
        return Err(SimError::NoAgents);
    }
    let lexicon = Arc::new(TopicLexicon::builtin().merged(&cfg.topics));
    let toxic = Arc::new(builtin_toxic_words());
    let mut policies = Vec::with_capacity(cfg.groups.len());
    for (g, group) in cfg.groups.iter().enumerate() {
        policies.push(build_policy(cfg, g, &group.policy, &lexicon, &toxic)?);
    }
    let n = cfg.n_agents() as u64;
    let mut agents = Vec::new();
    for (g, group) in cfg.groups.iter().enumerate() {
        for k in 0..group.count {
            let i = agents.len();
            let id = agent_id(i);
            let display_name = format!("{}_{}", group.name, k + 1);
            let backstory = group.backstory.as_ref().map(|t| {
                let mut rng = substream(cfg.seed, &format!("backstory/{id}"));
                let words = policies[g].backstory_words(&id, t.words, &mut rng);
                t.render(&display_name, &words)
            });
            let created_tick = if cfg.stagger_ticks == 0 { 0 } else { i as u64 * cfg.stagger_ticks / n };
            agents.push(AgentSpec { agent_id: id, display_name, backstory, policy: g, created_tick });
        }
    }
    Ok(Population { agents, policies })
}

pub fn run_simulation(cfg: &SimConfig) -> Result<SimOutput, SimError> {
    let pop = build_population(cfg)?;
    run_population(cfg, pop)
}

fn note(memory: &mut Memory, ts: Timestamp, kind: MemoryKind, text: String) {
    memory.push(MemoryEntry { ts, kind, text });
}

fn note_posts(memory: &mut Memory, ts: Timestamp, label: &str, posts: &[PostDigest]) {
    for p in posts {
        note(memory, ts, MemoryKind::Read, format!("{label} {} by {}: {}", p.post_id, p.author_id, p.text));
    }
}

/// Run the tick loop. The `groups` of `cfg` are ignored; agents and
/// policies come from `pop`.
pub fn run_population(cfg: &SimConfig, mut pop: Population) -> Result<SimOutput, SimError> {
    if pop.agents.is_empty() {
        return Err(SimError::NoAgents);
    }
    if let Some(a) = pop.agents.iter().find(|a| a.policy >= pop.policies.len()) {
        return Err(SimError::UnknownPolicy { agent: a.agent_id.to_string(), index: a.policy });
    }
    if cfg.tick_ms <= pop.agents.len() as i64 {
        return Err(SimError::TickTooShort { tick_ms: cfg.tick_ms, agents: pop.agents.len() });
    }
    let mut log = EventLog::new();
    let mut metrics = RunMetrics::default();
    let mut memories: Vec<Memory> =
        pop.agents.iter().map(|a| Memory::new(a.backstory.clone(), cfg.memory_size)).collect();
    let mut next_id = 0u64;

    for tick in 0..cfg.ticks {
        let tick_start = tick as i64 * cfg.tick_ms;
        for a in pop.agents.iter().filter(|a| a.created_tick == tick) {
            log.record(
                tick_start,
                EventPayload::AgentCreated {
                    agent_id: a.agent_id.clone(),
                    backstory: a.backstory.clone(),
                    display_name: a.display_name.clone(),
                },
            )?;
        }
        let mut order: Vec<usize> = (0..pop.agents.len()).filter(|&i| pop.agents[i].created_tick <= tick).collect();
        order.shuffle(&mut substream(cfg.seed, &format!("order/{tick}")));

        for (pos, &i) in order.iter().enumerate() {
            let now = tick_start + pos as i64 + 1;
            let spec = &pop.agents[i];
            let mut rng = substream(cfg.seed, &format!("{}/{tick}", spec.agent_id));
            let snap = log.head();
            let record = &snap.agents[&spec.agent_id];
            let mut obs: Observation = build_observation_at(snap, now, &spec.agent_id, &cfg.observation, None);
            obs.suggestions = sample_suggestions(
                snap,
                &spec.agent_id,
                cfg.observation.suggestions,
                cfg.observation.recent_per_agent,
                &mut rng,
            );
            let ctx = DecisionContext { agent: record, memory: &memories[i], obs: &obs, tick };
            let decision = pop.policies[spec.policy].decide(&ctx, &mut rng)?;
            metrics.decisions += 1;
            let Some(action) = decision else {
                metrics.noops += 1;
                continue;
            };
            let me = spec.agent_id.clone();
            let memory = &mut memories[i];

            if action.is_read() {
                match &action {
                    Action::SearchWeb { query } => {
                        let q = query.to_lowercase();
                        let hits = cfg
                            .web_docs
                            .iter()
                            .filter(|d| d.to_lowercase().contains(&q))
                            .take(cfg.observation.search_limit);
                        for d in hits {
                            note(memory, now, MemoryKind::Read, format!("web: {d}"));
                        }
                    }
                    Action::FetchTagged => note_posts(memory, now, "tagged", &obs.tagged),
                    Action::SearchPosts { query } => {
                        let hits = search_posts(log.head(), query, cfg.observation.search_limit);
                        note_posts(memory, now, "found", &hits);
                    }
                    Action::Trending => note_posts(memory, now, "trending", &obs.trending),
                    _ => unreachable!("write action"),
                }
                *metrics.actions.entry(action.verb().to_owned()).or_default() += 1;
                continue;
            }

            let (payload, kind, text) = match &action {
                Action::Post { text } => {
                    next_id += 1;
                    (
                        EventPayload::Posted {
                            post_id: PostId(format!("p{next_id}")),
                            author_id: me,
                            text: text.clone(),
                            reply_to: None,
                            likes: None,
                            views: None,
                            comments: None,
                        },
                        MemoryKind::OwnPost,
                        text.clone(),
                    )
                }
                Action::Reply { post_id, text } => {
                    next_id += 1;
                    (
                        EventPayload::Commented {
                            actor_id: me,
                            post_id: post_id.clone(),
                            text: text.clone(),
                            comment_id: PostId(format!("c{next_id}")),
                        },
                        MemoryKind::OwnReply,
                        text.clone(),
                    )
                }
                Action::Like { post_id } => (
                    EventPayload::Liked { actor_id: me, post_id: post_id.clone() },
                    MemoryKind::Reaction,
                    format!("liked {post_id}"),
                ),
                Action::Dislike { post_id } => (
                    EventPayload::Disliked { actor_id: me, post_id: post_id.clone() },
                    MemoryKind::Reaction,
                    format!("disliked {post_id}"),
                ),
                Action::Follow { agent_id } => (
                    EventPayload::Followed { follower_id: me, followee_id: agent_id.clone() },
                    MemoryKind::Social,
                    format!("followed {agent_id}"),
                ),
                Action::Unfollow { agent_id } => (
                    EventPayload::Unfollowed { follower_id: me, followee_id: agent_id.clone() },
                    MemoryKind::Social,
                    format!("unfollowed {agent_id}"),
                ),
                _ => unreachable!("read action"),
            };
            match log.record(now, payload) {
                Ok(_) => {
                    note(memory, now, kind, text);
                    *metrics.actions.entry(action.verb().to_owned()).or_default() += 1;
                }
                Err(e) => {
                    log::warn!("skipping `{action}` by {}: {e}", pop.agents[i].agent_id);
                    metrics.skipped_invalid += 1;
                }
            }
        }
    }
    metrics.parse_fallbacks = pop.policies.iter().map(|p| p.parse_fallbacks()).sum();
    Ok(SimOutput { log, metrics })
}
