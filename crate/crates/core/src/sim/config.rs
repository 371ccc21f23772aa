use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::memory::DEFAULT_MEMORY_SIZE;
use super::observation::ObservationConfig;
use super::scripted::ScriptedParams;

pub const DEFAULT_TICK_MS: i64 = 86_400_000;
pub const DEFAULT_TOKEN_ENV: &str = "AGENTNET_LLM_TOKEN";

/// Full simulation setup. Agent count is the sum of the group counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub ticks: u64,
    pub tick_ms: i64,
    /// Spread agent creation evenly over the first `stagger_ticks` ticks.
    pub stagger_ticks: u64,
    pub memory_size: usize,
    pub observation: ObservationConfig,
    /// Canned documents returned by `SEARCH_WEB`.
    pub web_docs: Vec<String>,
    /// Extra or replacement topic vocabularies for scripted agents.
    pub topics: BTreeMap<String, Vec<String>>,
    pub groups: Vec<GroupConfig>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            ticks: 100,
            tick_ms: DEFAULT_TICK_MS,
            stagger_ticks: 0,
            memory_size: DEFAULT_MEMORY_SIZE,
            observation: ObservationConfig::default(),
            web_docs: Vec::new(),
            topics: BTreeMap::new(),
            groups: Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn n_agents(&self) -> usize {
        self.groups.iter().map(|g| g.count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub name: String,
    pub count: usize,
    pub policy: PolicyConfig,
    /// Absent means the agents get no backstory.
    #[serde(default)]
    pub backstory: Option<BackstoryTemplate>,
}

/// `template` may use `{name}` (display name) and `{words}` (`words`
/// vocabulary words drawn by the group's policy).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackstoryTemplate {
    pub template: String,
    #[serde(default)]
    pub words: usize,
}

impl BackstoryTemplate {
    pub fn render(&self, name: &str, words: &[String]) -> String {
        self.template.replace("{name}", name).replace("{words}", &words.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyConfig {
    Scripted(ScriptedParams),
    Llm(LlmConfig),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureMode {
    /// Call the endpoint, no fixtures.
    #[default]
    Live,
    /// Call the endpoint and store each completion.
    Record,
    /// Answer only from stored completions.
    Replay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub url: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub token_env: String,
    pub fixtures: Option<PathBuf>,
    pub mode: FixtureMode,
    pub retries: usize,
    pub max_tokens: u32,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            url: String::new(),
            model: String::new(),
            token_env: DEFAULT_TOKEN_ENV.into(),
            fixtures: None,
            mode: FixtureMode::Live,
            retries: super::llm::LlmPolicy::DEFAULT_RETRIES,
            max_tokens: 128,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let cfg: SimConfig = serde_json::from_value(serde_json::json!({
            "seed": 3,
            "ticks": 10,
            "groups": [
                {"name": "fans", "count": 4,
                 "policy": {"kind": "scripted", "follow_homophily": 1.0, "topic_affinities": {"music": 1.0}},
                 "backstory": {"template": "{name} likes {words}", "words": 2}},
                {"name": "bots", "count": 1, "policy": {"kind": "llm", "url": "http://x", "mode": "replay", "fixtures": "fx"}}
            ]
        }))
        .unwrap();
        assert_eq!(cfg.n_agents(), 5);
        assert_eq!(cfg.tick_ms, DEFAULT_TICK_MS);
        match &cfg.groups[0].policy {
            PolicyConfig::Scripted(p) => assert_eq!(p.follow_homophily, 1.0),
            other => panic!("{other:?}"),
        }
        match &cfg.groups[1].policy {
            PolicyConfig::Llm(l) => {
                assert_eq!(l.mode, FixtureMode::Replay);
                assert_eq!(l.token_env, DEFAULT_TOKEN_ENV);
            }
            other => panic!("{other:?}"),
        }
        assert!(cfg.groups[1].backstory.is_none());
    }

    #[test]
    fn unknown_keys_rejected() {
        let r: Result<SimConfig, _> = serde_json::from_value(serde_json::json!({"seeds": 1}));
        assert!(r.is_err());
    }

    #[test]
    fn template_render() {
        let t = BackstoryTemplate { template: "I am {name}; I like {words}.".into(), words: 2 };
        assert_eq!(t.render("ann", &["jazz".into(), "piano".into()]), "I am ann; I like jazz piano.");
    }
}
