use std::collections::BTreeMap;

use super::{FollowGraph, GraphError, IndexGraph};
use crate::model::AgentId;

/// Normalized mixing matrix `e[i][j]` over directed arcs (source category i,
/// target category j). Categories are indexed in sorted label order.
pub fn mixing_matrix<L: Ord + Clone>(g: &IndexGraph, labels: &[L]) -> Result<(Vec<L>, Vec<Vec<f64>>), GraphError> {
    if labels.len() < g.n() {
        return Err(GraphError::UnlabeledNode(labels.len()));
    }
    let cats: Vec<L> = {
        let mut c: Vec<L> = labels[..g.n()].to_vec();
        c.sort();
        c.dedup();
        c
    };
    let idx: BTreeMap<&L, usize> = cats.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let k = cats.len();
    let mut e = vec![vec![0.0; k]; k];
    let mut total = 0.0;
    for (u, v) in g.arcs() {
        e[idx[&labels[u]]][idx[&labels[v]]] += 1.0;
        total += 1.0;
    }
    if total == 0.0 {
        return Err(GraphError::EmptyGraph);
    }
    for row in &mut e {
        row.iter_mut().for_each(|x| *x /= total);
    }
    Ok((cats, e))
}

/// Newman's categorical assortativity `(Σ e_ii − Σ a_i b_i) / (1 − Σ a_i b_i)`.
pub fn assortativity<L: Ord + Clone>(g: &IndexGraph, labels: &[L]) -> Result<f64, GraphError> {
    let (_, e) = mixing_matrix(g, labels)?;
    let k = e.len();
    let trace: f64 = (0..k).map(|i| e[i][i]).sum();
    let ab: f64 = (0..k)
        .map(|i| {
            let a: f64 = e[i].iter().sum();
            let b: f64 = (0..k).map(|j| e[j][i]).sum();
            a * b
        })
        .sum();
    let denom = 1.0 - ab;
    if denom.abs() < 1e-15 {
        return Err(GraphError::DegenerateMixing);
    }
    Ok((trace - ab) / denom)
}

/// Assortativity of a follow graph with labels keyed by agent id.
pub fn assortativity_by_id<L: Ord + Clone>(g: &FollowGraph, labels: &BTreeMap<AgentId, L>) -> Result<f64, GraphError> {
    let dense: Vec<L> = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, id)| labels.get(id).cloned().ok_or(GraphError::UnlabeledNode(i)))
        .collect::<Result<_, _>>()?;
    assortativity(&g.view(super::GraphView::Directed), &dense)
}

/// What "random mixing" means when turning observed edge shares into ratios.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingBaseline {
    /// Expected shares from node fractions: `2p(1-p)` cross, `p² + (1-p)²` same.
    #[default]
    NodeFraction,
    /// Expected shares from the arc-endpoint marginals, `Σ a_i b_i` same.
    DegreeWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MixingRatios {
    /// Observed share of arcs between the two classes over its expectation.
    pub cross_group_ratio: f64,
    /// Observed share of arcs within a class over its expectation.
    pub same_group_ratio: f64,
    pub observed_cross: f64,
    pub expected_cross: f64,
}

/// Observed-to-expected ratios of cross- and same-class arcs for a binary labeling.
pub fn mixing_ratios(g: &IndexGraph, labels: &[bool], baseline: MixingBaseline) -> Result<MixingRatios, GraphError> {
    if labels.len() < g.n() {
        return Err(GraphError::UnlabeledNode(labels.len()));
    }
    let labels = &labels[..g.n()];
    let n_true = labels.iter().filter(|l| **l).count();
    if n_true == 0 || n_true == labels.len() {
        return Err(GraphError::SingleClass);
    }
    let (mut arcs, mut cross, mut src_true, mut dst_true) = (0u64, 0u64, 0u64, 0u64);
    for (u, v) in g.arcs() {
        arcs += 1;
        cross += (labels[u] != labels[v]) as u64;
        src_true += labels[u] as u64;
        dst_true += labels[v] as u64;
    }
    if arcs == 0 {
        return Err(GraphError::EmptyGraph);
    }
    // integer numerators keep the result exactly symmetric under label swaps
    let expected_same = match baseline {
        MixingBaseline::NodeFraction => {
            let (t, f, n) = (n_true as f64, (labels.len() - n_true) as f64, labels.len() as f64);
            (t * t + f * f) / (n * n)
        }
        MixingBaseline::DegreeWeighted => {
            let (st, dt, a) = (src_true as f64, dst_true as f64, arcs as f64);
            (st * dt + (a - st) * (a - dt)) / (a * a)
        }
    };
    let (arcs, cross) = (arcs as f64, cross as f64);
    let expected_cross = 1.0 - expected_same;
    if expected_cross <= 0.0 || expected_same <= 0.0 {
        return Err(GraphError::DegenerateMixing);
    }
    let observed_cross = cross / arcs;
    Ok(MixingRatios {
        cross_group_ratio: observed_cross / expected_cross,
        same_group_ratio: (1.0 - observed_cross) / expected_same,
        observed_cross,
        expected_cross,
    })
}
