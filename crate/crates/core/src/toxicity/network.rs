use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ToxicityError, ToxicityProfile};
use crate::graph::{assortativity, mixing_ratios, FollowGraph, GraphView, MixingBaseline};
use crate::model::AgentId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToxicNetworkStats {
    pub assortativity: f64,
    pub cross_group_ratio: f64,
    pub same_group_ratio: f64,
    pub n_toxic: usize,
    pub n_nontoxic: usize,
    pub n_edges: usize,
}

/// At each threshold `k`, compare agents with no toxic posts against agents
/// with at least `k`, on the follow subgraph induced by those two classes.
pub fn toxic_homophily(
    g: &FollowGraph,
    profiles: &BTreeMap<AgentId, ToxicityProfile>,
    thresholds: &[u32],
    baseline: MixingBaseline,
) -> Result<BTreeMap<u32, ToxicNetworkStats>, ToxicityError> {
    let counts: Vec<u32> = g
        .nodes()
        .iter()
        .map(|id| profiles.get(id).map(|p| p.n_toxic).ok_or_else(|| ToxicityError::Unprofiled(id.to_string())))
        .collect::<Result<_, _>>()?;
    let directed = g.view(GraphView::Directed);
    let mut out = BTreeMap::new();
    for &k in thresholds {
        if k == 0 {
            return Err(ToxicityError::InvalidThreshold(k));
        }
        let keep: Vec<usize> = (0..g.n()).filter(|&u| counts[u] == 0 || counts[u] >= k).collect();
        let labels: Vec<bool> = keep.iter().map(|&u| counts[u] >= k).collect();
        let n_toxic = labels.iter().filter(|l| **l).count();
        let n_nontoxic = labels.len() - n_toxic;
        if n_toxic == 0 || n_nontoxic == 0 {
            return Err(ToxicityError::EmptyClass { threshold: k, toxic: n_toxic, nontoxic: n_nontoxic });
        }
        let (sub, _) = directed.induced(&keep);
        let ratios = mixing_ratios(&sub, &labels, baseline)?;
        out.insert(
            k,
            ToxicNetworkStats {
                assortativity: assortativity(&sub, &labels)?,
                cross_group_ratio: ratios.cross_group_ratio,
                same_group_ratio: ratios.same_group_ratio,
                n_toxic,
                n_nontoxic,
                n_edges: sub.edge_count(),
            },
        );
    }
    Ok(out)
}
