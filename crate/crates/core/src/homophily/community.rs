use std::collections::BTreeMap;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::corpus::{cos, EncodedCorpus};
use super::HomophilyError;
use crate::graph::{greedy_modularity_communities, FollowGraph, GraphView};
use crate::model::{AgentId, Snapshot};
use crate::text::EncoderPort;
use crate::util::substream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CommunityConfig {
    /// Communities smaller than this share of all agents are dropped.
    pub min_community_frac: f64,
    pub n_random: usize,
    pub seed: u64,
}

impl Default for CommunityConfig {
    fn default() -> Self {
        Self { min_community_frac: 0.01, n_random: 100, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentHomophily {
    pub community: usize,
    /// Mean similarity to the other members of the agent's community.
    pub e_c: f64,
    /// Mean similarity to a random sample of agents outside it.
    pub e_bar_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomophilyReport {
    pub per_agent: BTreeMap<AgentId, AgentHomophily>,
    /// Mean of `e_c / e_bar_c` over agents with a non-zero baseline.
    pub mean_ratio: f64,
    pub n_random: usize,
    pub n_communities: usize,
    pub modularity: f64,
    /// Sizes of the communities that were too small.
    pub excluded_small_communities: Vec<usize>,
}

/// Compare each agent's similarity to its own community with its similarity
/// to random outsiders. Agent encodings are the mean of all their posts.
pub fn community_homophily(
    snap: &Snapshot,
    enc: &dyn EncoderPort,
    cfg: &CommunityConfig,
) -> Result<HomophilyReport, HomophilyError> {
    if !(0.0..=1.0).contains(&cfg.min_community_frac) || cfg.n_random == 0 {
        return Err(HomophilyError::InvalidConfig("need min_community_frac in [0, 1] and n_random > 0".into()));
    }
    let graph = FollowGraph::from_snapshot(snap);
    let undirected = graph.view(GraphView::Undirected);
    if undirected.edge_count() == 0 {
        return Err(HomophilyError::NoCommunities);
    }
    let partition = greedy_modularity_communities(&undirected)?;
    let corpus = EncodedCorpus::build(snap, enc)?;
    let vectors: Vec<Option<Vec<f64>>> = graph.nodes().iter().map(|a| corpus.mean_all(a)).collect();

    let min_size = cfg.min_community_frac * graph.n() as f64;
    let mut excluded = Vec::new();
    let mut per_agent = BTreeMap::new();
    let mut kept = 0;
    for (c, members) in partition.communities().into_iter().enumerate() {
        if (members.len() as f64) < min_size {
            excluded.push(members.len());
            continue;
        }
        kept += 1;
        let inside: Vec<usize> = members.iter().copied().filter(|&u| vectors[u].is_some()).collect();
        if inside.len() < 2 {
            continue;
        }
        let outside: Vec<usize> =
            (0..graph.n()).filter(|&u| vectors[u].is_some() && partition.assignment[u] != c).collect();
        if outside.len() < cfg.n_random {
            return Err(HomophilyError::InsufficientOutsiders {
                community: c,
                available: outside.len(),
                n_random: cfg.n_random,
            });
        }
        for &u in &inside {
            let vu = vectors[u].as_deref().expect("filtered");
            let e_c = inside
                .iter()
                .filter(|&&w| w != u)
                .map(|&w| cos(vu, vectors[w].as_deref().expect("filtered")))
                .sum::<f64>()
                / (inside.len() - 1) as f64;
            let id = &graph.nodes()[u];
            let mut rng = substream(cfg.seed, &format!("community/{id}"));
            let picked = sample(&mut rng, outside.len(), cfg.n_random);
            let e_bar_c = picked
                .iter()
                .map(|i| cos(vu, vectors[outside[i]].as_deref().expect("filtered")))
                .sum::<f64>()
                / cfg.n_random as f64;
            per_agent.insert(id.clone(), AgentHomophily { community: c, e_c, e_bar_c });
        }
    }
    if kept == 0 {
        return Err(HomophilyError::NoCommunities);
    }
    let ratios: Vec<f64> = per_agent.values().filter(|h| h.e_bar_c != 0.0).map(|h| h.e_c / h.e_bar_c).collect();
    if ratios.is_empty() {
        return Err(HomophilyError::ZeroBaseline);
    }
    Ok(HomophilyReport {
        mean_ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
        per_agent,
        n_random: cfg.n_random,
        n_communities: kept,
        modularity: partition.modularity,
        excluded_small_communities: excluded,
    })
}
