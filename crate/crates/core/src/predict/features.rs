use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Level, PredictError};
use crate::homophily::EncodedCorpus;
use crate::model::{AgentId, Snapshot};
use crate::text::{mean_vector, EncoderPort};
use crate::util::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub agent_id: AgentId,
    pub backstory_vec: Vec<f64>,
    /// Mean of the neighbors' agent encodings.
    pub neighbor_posts_vec: Option<Vec<f64>>,
    /// Mean of the neighbors' scores.
    pub neighbor_score_mean: Option<f64>,
    pub target: f64,
    pub class_label: i8,
}

impl FeatureBundle {
    pub fn dim(&self) -> usize {
        self.backstory_vec.len()
    }

    /// Design row for `level`. Missing neighbor blocks are zero-filled.
    pub fn features(&self, level: Level) -> Vec<f64> {
        let d = self.dim();
        let mut row = Vec::with_capacity(level.width(d));
        row.extend_from_slice(&self.backstory_vec);
        if level.has_posts() {
            match &self.neighbor_posts_vec {
                Some(v) => row.extend_from_slice(v),
                None => row.extend(std::iter::repeat(0.0).take(d)),
            }
        }
        if level.has_opinions() {
            row.push(self.neighbor_score_mean.unwrap_or(0.0));
        }
        row
    }
}

/// Which follow edges define an agent's neighbors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborMode {
    /// Accounts the agent follows.
    #[default]
    Out,
    /// Accounts following the agent.
    In,
    Both,
}

/// One bundle per agent with a backstory and a non-zero score. The agent's own
/// posts never enter its features.
pub fn build_bundles(
    snap: &Snapshot,
    scores: &BTreeMap<AgentId, f64>,
    enc: &dyn EncoderPort,
    mode: NeighborMode,
) -> Result<Vec<FeatureBundle>, PredictError> {
    let corpus = EncodedCorpus::build(snap, enc)?;
    let encodings: BTreeMap<&AgentId, Vec<f64>> =
        corpus.agents().filter_map(|a| corpus.mean_all(a).map(|v| (a, v))).collect();
    let mut out = Vec::new();
    for agent in snap.agents.values() {
        let Some(backstory) = agent.backstory.as_deref() else { continue };
        let Some(&target) = scores.get(&agent.agent_id) else { continue };
        if target == 0.0 || !target.is_finite() {
            continue;
        }
        let id = &agent.agent_id;
        let mut neighbors: Vec<&AgentId> = match mode {
            NeighborMode::Out => snap.following(id).collect(),
            NeighborMode::In => snap.followers(id).collect(),
            NeighborMode::Both => snap.following(id).chain(snap.followers(id)).collect(),
        };
        neighbors.sort();
        neighbors.dedup();
        let neighbor_posts_vec =
            mean_vector(neighbors.iter().filter_map(|n| encodings.get(n)).map(Vec::as_slice), enc.dim());
        let opinions: Vec<f64> = neighbors.iter().filter_map(|n| scores.get(*n)).copied().collect();
        let neighbor_score_mean =
            (!opinions.is_empty()).then(|| opinions.iter().sum::<f64>() / opinions.len() as f64);
        out.push(FeatureBundle {
            agent_id: id.clone(),
            backstory_vec: enc.encode(backstory)?,
            neighbor_posts_vec,
            neighbor_score_mean,
            target: target.clamp(-1.0, 1.0),
            class_label: if target > 0.0 { 1 } else { -1 },
        });
    }
    Ok(out)
}

/// Planted generator. A latent neighbor opinion `o ~ U(-1, 1)` is observed
/// twice: as the neighbor score mean plus noise, and along a hidden direction
/// of the neighbor posts vector plus unit Gaussian noise. Targets are
/// `backstory_weight * tanh(w·b / sqrt(D)) + neighbor_weight * o`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub dim: usize,
    pub backstory_weight: f64,
    pub neighbor_weight: f64,
    /// Scale of `o` along the hidden direction of the posts vector.
    pub posts_signal: f64,
    /// Standard deviation of the noise on the observed score mean.
    pub opinion_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 3000,
            dim: 16,
            backstory_weight: 0.5,
            neighbor_weight: 0.5,
            posts_signal: 2.0,
            opinion_noise: 0.3,
            seed: 0,
        }
    }
}

pub fn synthetic_bundles(spec: &SyntheticSpec) -> Vec<FeatureBundle> {
    let d = spec.dim.max(1);
    let mut rng = substream(spec.seed, "predict/synthetic");
    let gauss = |rng: &mut crate::util::Rng| -> f64 { StandardNormal.sample(rng) };
    let w: Vec<f64> = (0..d).map(|_| gauss(&mut rng)).collect();
    let w_norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut u: Vec<f64> = (0..d).map(|_| gauss(&mut rng)).collect();
    let u_norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    u.iter_mut().for_each(|x| *x /= u_norm);
    let mut out = Vec::with_capacity(spec.n);
    while out.len() < spec.n {
        let b: Vec<f64> = (0..d).map(|_| gauss(&mut rng)).collect();
        let o: f64 = rng.gen_range(-1.0..1.0);
        let posts: Vec<f64> = u.iter().map(|ui| spec.posts_signal * o * ui + gauss(&mut rng)).collect();
        let observed = o + spec.opinion_noise * gauss(&mut rng);
        let signal = (b.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>() / w_norm).tanh();
        let target = (spec.backstory_weight * signal + spec.neighbor_weight * o).clamp(-1.0, 1.0);
        if target == 0.0 {
            continue;
        }
        out.push(FeatureBundle {
            agent_id: AgentId(format!("s{:05}", out.len())),
            backstory_vec: b,
            neighbor_posts_vec: Some(posts),
            neighbor_score_mean: Some(observed),
            target,
            class_label: if target > 0.0 { 1 } else { -1 },
        });
    }
    out
}
