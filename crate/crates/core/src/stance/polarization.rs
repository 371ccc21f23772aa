use serde::{Deserialize, Serialize};

use super::StanceError;
use crate::graph::{assortativity, mixing_ratios, IndexGraph, MixingBaseline};

/// Which neighbors define a node's followership.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FollowDirection {
    /// Accounts the node follows.
    #[default]
    Out,
    /// Accounts following the node.
    In,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolarizationConfig {
    pub baseline: MixingBaseline,
    pub direction: FollowDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationReport {
    pub cross_group_ratio: f64,
    pub same_group_ratio: f64,
    /// Mean over nodes with a neighbor of `2 |share of one side - 0.5|`.
    pub polarization: f64,
    pub assortativity: f64,
    pub n_eligible: usize,
}

/// Node polarization scores (by direction); `None` for nodes without neighbors.
pub fn node_polarization(g: &IndexGraph, labels: &[bool], direction: FollowDirection) -> Vec<Option<f64>> {
    let mut tally = vec![(0usize, 0usize); g.n()];
    for (u, v) in g.arcs() {
        let (node, other) = match direction {
            FollowDirection::Out => (u, v),
            FollowDirection::In => (v, u),
        };
        tally[node].0 += labels[other] as usize;
        tally[node].1 += 1;
    }
    // |2k - n| / n equals 2|k/n - 1/2| and is exact under swapping the labels
    tally.into_iter().map(|(k, n)| (n > 0).then(|| (2 * k).abs_diff(n) as f64 / n as f64)).collect()
}

pub fn polarization_suite(
    g: &IndexGraph,
    labels: &[bool],
    cfg: &PolarizationConfig,
) -> Result<PolarizationReport, StanceError> {
    if labels.len() != g.n() {
        return Err(StanceError::InvalidConfig(format!("{} labels for {} nodes", labels.len(), g.n())));
    }
    let n_true = labels.iter().filter(|l| **l).count();
    if n_true == 0 || n_true == labels.len() {
        return Err(StanceError::EmptyClass);
    }
    let ratios = mixing_ratios(g, labels, cfg.baseline)?;
    let node: Vec<f64> = node_polarization(g, labels, cfg.direction).into_iter().flatten().collect();
    if node.is_empty() {
        return Err(StanceError::NoEligibleNodes);
    }
    Ok(PolarizationReport {
        cross_group_ratio: ratios.cross_group_ratio,
        same_group_ratio: ratios.same_group_ratio,
        polarization: node.iter().sum::<f64>() / node.len() as f64,
        assortativity: assortativity(g, labels)?,
        n_eligible: node.len(),
    })
}
