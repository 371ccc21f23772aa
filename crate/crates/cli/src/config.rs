use std::path::{Path, PathBuf};

use agentnet_core::graph::{MixingBaseline, PathPolicy};
use agentnet_core::homophily::{CommunityConfig, ConvergenceConfig, DriftConfig, FollowConfig};
use agentnet_core::predict::{HarnessConfig, Level, NeighborMode};
use agentnet_core::sim::{LlmConfig, SimConfig};
use agentnet_core::stance::PolarizationConfig;
use agentnet_core::toxicity::{EngagementUnit, DEFAULT_THRESHOLD, DEFAULT_THRESHOLDS};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Everything a run may read. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads for pure analyses; 0 uses every core.
    pub threads: usize,
    pub sim: SimConfig,
    pub encoder: EncoderSection,
    pub graph: GraphSection,
    pub homophily: HomophilySection,
    pub influence: InfluenceSection,
    pub toxicity: ToxicitySection,
    pub stance: StanceSection,
    pub ideology: IdeologySection,
    pub cost: CostSection,
    pub predict: PredictSection,
}

/// A remote service; only used when `url` is set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Remote {
    pub url: String,
    /// Environment variable holding the bearer token.
    pub token_env: Option<String>,
    /// Cache file; in memory when absent.
    pub cache: Option<PathBuf>,
}

impl Remote {
    pub fn enabled(&self) -> bool {
        !self.url.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderSection {
    pub dim: usize,
    pub seed: u64,
    pub remote: Remote,
}

impl Default for EncoderSection {
    fn default() -> Self {
        Self { dim: agentnet_core::text::DEFAULT_DIM, seed: 0, remote: Remote::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    pub paths: PathPolicy,
}

impl Default for GraphSection {
    fn default() -> Self {
        Self { paths: PathPolicy::Exact }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomophilySection {
    pub community: CommunityConfig,
    pub follow: FollowConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InfluenceSection {
    pub convergence: ConvergenceConfig,
    pub drift: DriftConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToxicitySection {
    pub threshold: f64,
    pub agent_thresholds: Vec<u32>,
    pub baseline: MixingBaseline,
    pub engagement_unit: EngagementUnit,
    /// Word list for the offline scorer, one word per line.
    pub lexicon: Option<PathBuf>,
    pub remote: Remote,
}

impl Default for ToxicitySection {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            agent_thresholds: DEFAULT_THRESHOLDS.to_vec(),
            baseline: MixingBaseline::default(),
            engagement_unit: EngagementUnit::default(),
            lexicon: None,
            remote: Remote::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StanceSection {
    pub bins: usize,
    pub remote: Remote,
}

impl Default for StanceSection {
    fn default() -> Self {
        Self { bins: agentnet_core::stance::DEFAULT_LEANING_BINS, remote: Remote::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdeologySection {
    pub keywords: Option<PathBuf>,
    /// CSV with `post_id,label` rows from manual review.
    pub adjudicated: Option<PathBuf>,
    pub min_posts: usize,
    pub min_abs_score: f64,
    pub polarization: PolarizationConfig,
    pub remote: Remote,
}

impl Default for IdeologySection {
    fn default() -> Self {
        Self {
            keywords: None,
            adjudicated: None,
            min_posts: agentnet_core::stance::DEFAULT_MIN_POSTS,
            min_abs_score: agentnet_core::stance::DEFAULT_MIN_ABS_SCORE,
            polarization: PolarizationConfig::default(),
            remote: Remote::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSection {
    pub sample: usize,
    /// Willingness of the offline stub without and with the preamble.
    pub stub_p_without_cue: f64,
    pub stub_p_with_cue: f64,
    /// Ask a language model instead of the stub.
    pub llm: Option<LlmConfig>,
}

impl Default for CostSection {
    fn default() -> Self {
        Self { sample: agentnet_core::cost::DEFAULT_SAMPLE, stub_p_without_cue: 0.8, stub_p_with_cue: 0.456, llm: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictTarget {
    /// Stance toward humans.
    #[default]
    Leaning,
    Ideology,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictSection {
    pub target: PredictTarget,
    pub levels: Vec<Level>,
    /// Splits use `seed, seed + 1, ...`.
    pub n_seeds: usize,
    pub neighbors: NeighborMode,
    pub harness: HarnessConfig,
}

impl Default for PredictSection {
    fn default() -> Self {
        Self {
            target: PredictTarget::Leaning,
            levels: Level::ALL.to_vec(),
            n_seeds: 5,
            neighbors: NeighborMode::Out,
            harness: HarnessConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Push the command-line seed into every seeded section.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sim.seed = seed;
        self.homophily.community.seed = seed;
        self.homophily.follow.seed = seed;
        self.predict.harness.split.seed = seed;
        if let PathPolicy::Sampled { seed: s, .. } | PathPolicy::Auto { seed: s } = &mut self.graph.paths {
            *s = seed;
        }
        self
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(bytes))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn sections_parse() {
        let cfg: RunConfig = toml::from_str(
            r#"
            threads = 1
            [sim]
            ticks = 5
            [[sim.groups]]
            name = "fans"
            count = 3
            policy = { kind = "scripted", topic_affinities = { music = 1.0 } }
            [toxicity]
            threshold = 0.4
            [graph.paths]
            mode = "sampled"
            pairs = 10
            seed = 1
            [predict]
            levels = ["B", "B+NO"]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.sim.n_agents(), 3);
        assert_eq!(cfg.toxicity.threshold, 0.4);
        assert_eq!(cfg.predict.levels, vec![Level::B, Level::BNo]);
        let seeded = cfg.with_seed(9);
        assert_eq!(seeded.graph.paths, PathPolicy::Sampled { pairs: 10, seed: 9 });
        assert_eq!(seeded.sim.seed, 9);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("[toxicity]\nthreshhold = 1").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let b = a.clone().with_seed(1);
        assert_eq!(a.hash(), RunConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
    }
}
