//! Rule-based agents with tunable homophily, influence and toxicity.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::action::Action;
use super::memory::Memory;
use super::observation::AgentDigest;
use super::policy::{DecisionContext, PolicyError, PolicyPort};
use crate::model::{AgentId, PostId};
use crate::text::{cosine_sim, EncoderPort, HashedBowEncoder};
use crate::util::{substream, Rng};

const BUILTIN_TOPICS: &str = include_str!("../../data/topics.txt");
const BUILTIN_TOXIC: &str = include_str!("../../data/toxic_words.txt");

/// Topic name -> vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicLexicon(pub BTreeMap<String, Vec<String>>);

impl TopicLexicon {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_TOPICS)
    }

    /// `topic: word word ...` per line; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        let mut map = BTreeMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if let Some((topic, words)) = line.split_once(':') {
                let words: Vec<String> = words.split_whitespace().map(str::to_lowercase).collect();
                if !words.is_empty() {
                    map.insert(topic.trim().to_owned(), words);
                }
            }
        }
        Self(map)
    }

    /// Topics in `other` replace or extend ours.
    pub fn merged(mut self, other: &BTreeMap<String, Vec<String>>) -> Self {
        for (k, v) in other {
            self.0.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn words(&self, topic: &str) -> Option<&[String]> {
        self.0.get(topic).map(Vec::as_slice)
    }
}

/// The built-in toxic word list, one token per line.
pub fn builtin_toxic_words() -> Vec<String> {
    BUILTIN_TOXIC.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_owned).collect()
}

/// Relative weights of the ten actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActionMix {
    pub post: f64,
    pub reply: f64,
    pub like: f64,
    pub dislike: f64,
    pub follow: f64,
    pub unfollow: f64,
    pub search_web: f64,
    pub fetch_tagged: f64,
    pub search_posts: f64,
    pub trending: f64,
}

impl Default for ActionMix {
    fn default() -> Self {
        Self {
            post: 0.45,
            reply: 0.1,
            like: 0.15,
            dislike: 0.02,
            follow: 0.12,
            unfollow: 0.01,
            search_web: 0.04,
            fetch_tagged: 0.04,
            search_posts: 0.03,
            trending: 0.04,
        }
    }
}

impl ActionMix {
    fn weights(&self) -> [f64; 10] {
        [
            self.post,
            self.reply,
            self.like,
            self.dislike,
            self.follow,
            self.unfollow,
            self.search_web,
            self.fetch_tagged,
            self.search_posts,
            self.trending,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScriptedParams {
    /// Topic -> weight. Empty means every lexicon topic with weight 1.
    pub topic_affinities: BTreeMap<String, f64>,
    /// If > 0, each agent keeps only this many topics, drawn from the
    /// affinities by a hash of its id.
    pub personal_topics: usize,
    /// β: 0 follows uniformly among suggestions, 1 only above `follow_threshold`.
    pub follow_homophily: f64,
    pub follow_threshold: f64,
    /// π_tox: chance a post carries toxic words.
    pub toxicity_rate: f64,
    /// γ: chance a post copies one word from a followee's recent post.
    pub copy_rate: f64,
    /// Chance each word slot re-uses an adopted (copied) word from memory.
    pub recall_rate: f64,
    pub mention_rate: f64,
    pub words_per_post: usize,
    pub max_following: usize,
    pub actions: ActionMix,
    pub seed: u64,
}

impl Default for ScriptedParams {
    fn default() -> Self {
        Self {
            topic_affinities: BTreeMap::new(),
            personal_topics: 0,
            follow_homophily: 0.5,
            follow_threshold: 0.3,
            toxicity_rate: 0.05,
            copy_rate: 0.2,
            recall_rate: 0.9,
            mention_rate: 0.05,
            words_per_post: 6,
            max_following: 20,
            actions: ActionMix::default(),
            seed: 0,
        }
    }
}

impl ScriptedParams {
    pub fn validate(&self) -> Result<(), PolicyError> {
        let probs = [
            ("follow_homophily", self.follow_homophily),
            ("toxicity_rate", self.toxicity_rate),
            ("copy_rate", self.copy_rate),
            ("recall_rate", self.recall_rate),
            ("mention_rate", self.mention_rate),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(PolicyError::InvalidParams(format!("{name} = {p} is not in [0, 1]")));
            }
        }
        if !self.follow_threshold.is_finite() {
            return Err(PolicyError::InvalidParams("follow_threshold must be finite".into()));
        }
        if self.topic_affinities.values().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(PolicyError::InvalidParams("topic weights must be finite and non-negative".into()));
        }
        if !self.topic_affinities.is_empty() && self.topic_affinities.values().all(|w| *w == 0.0) {
            return Err(PolicyError::InvalidParams("at least one topic weight must be positive".into()));
        }
        let w = self.actions.weights();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
            return Err(PolicyError::InvalidParams("action weights must be non-negative with a positive sum".into()));
        }
        if self.words_per_post == 0 {
            return Err(PolicyError::InvalidParams("words_per_post must be positive".into()));
        }
        Ok(())
    }

    /// Similarity a follow candidate must exceed: −1 at β = 0, `follow_threshold` at β = 1.
    pub fn similarity_threshold(&self) -> f64 {
        let b = self.follow_homophily;
        -(1.0 - b) + self.follow_threshold * b
    }
}

pub struct ScriptedPolicy {
    params: ScriptedParams,
    lexicon: Arc<TopicLexicon>,
    toxic: Arc<Vec<String>>,
    toxic_set: BTreeSet<String>,
    encoder: HashedBowEncoder,
}

impl ScriptedPolicy {
    pub fn new(params: ScriptedParams, lexicon: Arc<TopicLexicon>, toxic: Arc<Vec<String>>) -> Result<Self, PolicyError> {
        params.validate()?;
        for topic in params.topic_affinities.keys() {
            if lexicon.words(topic).is_none() {
                return Err(PolicyError::InvalidParams(format!("unknown topic `{topic}`")));
            }
        }
        if toxic.is_empty() && params.toxicity_rate > 0.0 {
            return Err(PolicyError::InvalidParams("toxicity_rate > 0 needs a toxic lexicon".into()));
        }
        let toxic_set = toxic.iter().cloned().collect();
        let encoder = HashedBowEncoder::new(crate::text::DEFAULT_DIM, 0).expect("valid dim");
        Ok(Self { params, lexicon, toxic, toxic_set, encoder })
    }

    pub fn with_builtin(params: ScriptedParams) -> Result<Self, PolicyError> {
        Self::new(params, Arc::new(TopicLexicon::builtin()), Arc::new(builtin_toxic_words()))
    }

    pub fn params(&self) -> &ScriptedParams {
        &self.params
    }

    /// The agent's topics and weights; a pure function of its id.
    pub fn agent_topics(&self, agent: &AgentId) -> Vec<(&str, f64)> {
        let all: Vec<(&str, f64)> = if self.params.topic_affinities.is_empty() {
            self.lexicon.0.keys().map(|k| (k.as_str(), 1.0)).collect()
        } else {
            self.params.topic_affinities.iter().filter(|(_, w)| **w > 0.0).map(|(k, w)| (k.as_str(), *w)).collect()
        };
        let k = self.params.personal_topics;
        if k == 0 || k >= all.len() {
            return all;
        }
        let mut rng = substream(self.params.seed, agent.as_str());
        let mut picked = all
            .choose_multiple_weighted(&mut rng, k, |(_, w)| *w)
            .expect("validated weights")
            .copied()
            .collect::<Vec<_>>();
        picked.sort_by(|a, b| a.0.cmp(b.0));
        picked
    }

    fn topic_word(&self, topics: &[(&str, f64)], rng: &mut Rng) -> String {
        let (topic, _) = topics.choose_weighted(rng, |(_, w)| *w).expect("at least one topic");
        self.lexicon.words(topic).and_then(|w| w.choose(rng)).cloned().unwrap_or_default()
    }

    fn plain_words<'a>(&'a self, text: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        text.split_whitespace()
            .filter(|w| w.chars().all(|c| c.is_alphabetic()) && !self.toxic_set.contains(*w))
    }

    /// Generate post text: fresh topic words, re-used adopted words, at most
    /// one word copied from a followee, optional toxic words and a mention.
    fn compose(&self, ctx: &DecisionContext<'_>, n_words: usize, rng: &mut Rng) -> String {
        let p = &self.params;
        let topics = self.agent_topics(&ctx.agent.agent_id);
        let own_vocab: BTreeSet<&str> =
            topics.iter().filter_map(|(t, _)| self.lexicon.words(t)).flatten().map(String::as_str).collect();
        let remembered: Vec<&str> = ctx.memory.own_texts().flat_map(|t| self.plain_words(t)).collect();

        let mut words: Vec<String> = (0..n_words)
            .map(|_| {
                if rng.gen_bool(p.recall_rate) {
                    if let Some(w) = remembered.choose(rng) {
                        if !own_vocab.contains(w) {
                            return (*w).to_owned();
                        }
                    }
                }
                self.topic_word(&topics, rng)
            })
            .collect();

        if rng.gen_bool(p.copy_rate) {
            let sources: Vec<&str> = ctx
                .obs
                .following
                .iter()
                .flat_map(|d| d.recent.iter())
                .flat_map(|post| self.plain_words(&post.text))
                .collect();
            if let Some(w) = sources.choose(rng) {
                let slot = rng.gen_range(0..words.len());
                words[slot] = (*w).to_owned();
            }
        }

        if p.toxicity_rate > 0.0 && rng.gen_bool(p.toxicity_rate) {
            // enough hits that the lexicon scorer labels the post toxic,
            // counting the mention that may still be appended
            let hits = (words.len() + 1) / 8 + 1;
            let mut slots: Vec<usize> = (0..words.len()).collect();
            slots.shuffle(rng);
            for &s in slots.iter().take(hits) {
                words[s] = self.toxic.choose(rng).expect("non-empty lexicon").clone();
            }
        }

        if p.mention_rate > 0.0 && rng.gen_bool(p.mention_rate) {
            let pool: Vec<&AgentDigest> = ctx.obs.following.iter().chain(&ctx.obs.suggestions).collect();
            if let Some(d) = pool.choose(rng) {
                words.push(format!("@{}", d.display_name));
            }
        }
        words.join(" ")
    }

    fn profile(&self, memory: &Memory) -> Vec<f64> {
        let mut text: String = memory.backstory().unwrap_or("").to_owned();
        for t in memory.own_texts() {
            text.push(' ');
            text.push_str(t);
        }
        self.encoder.encode(&text).expect("hashed encoder is infallible")
    }

    fn pick_follow(&self, ctx: &DecisionContext<'_>, rng: &mut Rng) -> Option<AgentId> {
        let following: BTreeSet<&AgentId> = ctx.obs.following.iter().map(|d| &d.agent_id).collect();
        if following.len() >= self.params.max_following {
            return None;
        }
        let candidates: Vec<&AgentDigest> = ctx
            .obs
            .suggestions
            .iter()
            .filter(|d| d.agent_id != ctx.agent.agent_id && !following.contains(&d.agent_id))
            .collect();
        let tau = self.params.similarity_threshold();
        let eligible: Vec<&AgentDigest> = if tau < -1.0 + 1e-12 {
            candidates
        } else {
            let me = self.profile(ctx.memory);
            candidates
                .into_iter()
                .filter(|d| {
                    let text: Vec<&str> = d.recent.iter().map(|p| p.text.as_str()).collect();
                    let v = self.encoder.encode(&text.join(" ")).expect("hashed encoder is infallible");
                    cosine_sim(&me, &v).unwrap_or(0.0) > tau
                })
                .collect()
        };
        eligible.choose(rng).map(|d| d.agent_id.clone())
    }

    fn pick_target(&self, ctx: &DecisionContext<'_>, rng: &mut Rng) -> Option<PostId> {
        let me = &ctx.agent.agent_id;
        let pool: Vec<&PostId> = ctx
            .obs
            .trending
            .iter()
            .chain(ctx.obs.following.iter().flat_map(|d| d.recent.iter()))
            .chain(&ctx.obs.tagged)
            .filter(|p| &p.author_id != me)
            .map(|p| &p.post_id)
            .collect();
        pool.choose(rng).map(|id| (*id).clone())
    }
}

impl PolicyPort for ScriptedPolicy {
    fn decide(&mut self, ctx: &DecisionContext<'_>, rng: &mut Rng) -> Result<Option<Action>, PolicyError> {
        let weights = self.params.actions.weights();
        let choice = {
            let total: f64 = weights.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            let mut pick = 0;
            for (i, w) in weights.iter().enumerate() {
                if u < *w {
                    pick = i;
                    break;
                }
                u -= w;
                pick = i;
            }
            pick
        };
        let n = self.params.words_per_post;
        let post = |s: &Self, rng: &mut Rng| Action::Post { text: s.compose(ctx, n, rng) };
        let topics = self.agent_topics(&ctx.agent.agent_id);
        let action = match choice {
            0 => post(self, rng),
            1 => match self.pick_target(ctx, rng) {
                Some(post_id) => Action::Reply { post_id, text: self.compose(ctx, n.div_ceil(2), rng) },
                None => post(self, rng),
            },
            2 | 3 => match self.pick_target(ctx, rng) {
                Some(post_id) if choice == 2 => Action::Like { post_id },
                Some(post_id) => Action::Dislike { post_id },
                None => post(self, rng),
            },
            4 => match self.pick_follow(ctx, rng) {
                Some(agent_id) => Action::Follow { agent_id },
                None => post(self, rng),
            },
            5 => match ctx.obs.following.choose(rng) {
                Some(d) => Action::Unfollow { agent_id: d.agent_id.clone() },
                None => post(self, rng),
            },
            6 => Action::SearchWeb { query: self.topic_word(&topics, rng) },
            7 => Action::FetchTagged,
            8 => Action::SearchPosts { query: self.topic_word(&topics, rng) },
            _ => Action::Trending,
        };
        Ok(Some(action))
    }

    fn backstory_words(&self, agent: &AgentId, n: usize, rng: &mut Rng) -> Vec<String> {
        let topics = self.agent_topics(agent);
        (0..n).map(|_| self.topic_word(&topics, rng)).collect()
    }
}
