//! Follow-graph construction and structural metrics.

mod assortativity;
mod community;
mod metrics;
mod paths;
mod rewire;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AgentId, Snapshot, Timestamp};

pub use assortativity::{assortativity, assortativity_by_id, mixing_matrix, mixing_ratios, MixingBaseline, MixingRatios};
pub use community::{greedy_modularity_communities, modularity, Partition};
pub use metrics::{
    avg_clustering_by_degree, connected_components, degree_histogram, local_clustering, reciprocity, DegreeMode,
};
pub use paths::{avg_shortest_path, bfs_distances, closeness_centrality, PathPolicy, PathStats, DEFAULT_SAMPLED_PAIRS};
pub use rewire::{degree_preserving_random, edge_overlap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("node {0} is not in the graph")]
    UnknownNode(usize),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("no pair of nodes is connected by a path")]
    NoReachablePairs,
    #[error("node {0} has no label")]
    UnlabeledNode(usize),
    #[error("mixing matrix is degenerate (all edges in one category)")]
    DegenerateMixing,
    #[error("every node has the same label")]
    SingleClass,
    #[error("invalid edge {0} -> {1}")]
    InvalidEdge(usize, usize),
    #[error("edge list line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Adjacency-list graph over nodes `0..n`.
///
/// Undirected graphs store each edge in both endpoint lists. Lists are sorted
/// and free of duplicates and self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexGraph {
    adj: Vec<Vec<usize>>,
    directed: bool,
}

impl IndexGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>, directed: bool) -> Self {
        let mut sets = vec![BTreeSet::new(); n];
        for (u, v) in edges {
            if u == v || u >= n || v >= n {
                continue;
            }
            sets[u].insert(v);
            if !directed {
                sets[v].insert(u);
            }
        }
        Self { adj: sets.into_iter().map(|s| s.into_iter().collect()).collect(), directed }
    }

    pub fn directed(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self::new(n, edges, true)
    }

    pub fn undirected(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self::new(n, edges, false)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(u).is_some_and(|a| a.binary_search(&v).is_ok())
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n()];
        for a in &self.adj {
            for &v in a {
                d[v] += 1;
            }
        }
        d
    }

    /// Number of edges (unordered pairs for undirected graphs).
    pub fn edge_count(&self) -> usize {
        let arcs: usize = self.adj.iter().map(Vec::len).sum();
        if self.directed {
            arcs
        } else {
            arcs / 2
        }
    }

    /// Arcs `(u, v)`; undirected edges appear once per direction.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, a)| a.iter().map(move |&v| (u, v)))
    }

    pub fn induced(&self, keep: &[usize]) -> (IndexGraph, Vec<usize>) {
        let mut pos = vec![usize::MAX; self.n()];
        for (i, &u) in keep.iter().enumerate() {
            pos[u] = i;
        }
        let edges = keep.iter().flat_map(|&u| {
            let pos = &pos;
            self.adj[u].iter().filter(move |&&v| pos[v] != usize::MAX).map(move |&v| (pos[u], pos[v]))
        });
        (IndexGraph::new(keep.len(), edges.collect::<Vec<_>>(), self.directed), keep.to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphView {
    Directed,
    /// Edge iff either direction exists.
    Undirected,
    /// Edge iff both directions exist.
    Mutual,
}

/// Directed follow graph over agent ids with per-edge creation times.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FollowGraph {
    nodes: Vec<AgentId>,
    index: BTreeMap<AgentId, usize>,
    edges: BTreeMap<(usize, usize), Timestamp>,
}

impl FollowGraph {
    /// All agents in the snapshot (isolated ones included) and its live edges.
    pub fn from_snapshot(snap: &Snapshot) -> Self {
        let nodes: Vec<AgentId> = snap.agents.keys().cloned().collect();
        let index: BTreeMap<AgentId, usize> = nodes.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let edges = snap.follows.iter().map(|((f, t), ts)| ((index[f], index[t]), *ts)).collect();
        Self { nodes, index, edges }
    }

    pub fn from_edges(
        nodes: Vec<AgentId>,
        edges: impl IntoIterator<Item = (usize, usize, Timestamp)>,
    ) -> Result<Self, GraphError> {
        let index = nodes.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let n = nodes.len();
        let mut map = BTreeMap::new();
        for (u, v, ts) in edges {
            if u == v || u >= n || v >= n {
                return Err(GraphError::InvalidEdge(u, v));
            }
            map.insert((u, v), ts);
        }
        Ok(Self { nodes, index, edges: map })
    }

    /// Nodes named `n0..n{k-1}`; handy for synthetic graphs.
    pub fn from_index_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let nodes = (0..n).map(|i| AgentId(format!("n{i}"))).collect();
        Self::from_edges(nodes, edges.into_iter().map(|(u, v)| (u, v, 0)))
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[AgentId] {
        &self.nodes
    }

    pub fn index_of(&self, id: &AgentId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Timestamp)> + '_ {
        self.edges.iter().map(|(&(u, v), &ts)| (u, v, ts))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains_key(&(u, v))
    }

    pub fn view(&self, view: GraphView) -> IndexGraph {
        let n = self.n();
        match view {
            GraphView::Directed => IndexGraph::directed(n, self.edges.keys().copied()),
            GraphView::Undirected => IndexGraph::undirected(n, self.edges.keys().copied()),
            GraphView::Mutual => IndexGraph::undirected(
                n,
                self.edges.keys().copied().filter(|&(u, v)| u < v && self.edges.contains_key(&(v, u))),
            ),
        }
    }

    /// Subgraph induced by `keep` (indices into this graph), in the given order.
    pub fn induced(&self, keep: &[usize]) -> FollowGraph {
        let mut pos = BTreeMap::new();
        for (i, &u) in keep.iter().enumerate() {
            pos.insert(u, i);
        }
        let nodes: Vec<AgentId> = keep.iter().map(|&u| self.nodes[u].clone()).collect();
        let index = nodes.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|(&(u, v), &ts)| Some(((*pos.get(&u)?, *pos.get(&v)?), ts)))
            .collect();
        FollowGraph { nodes, index, edges }
    }

    /// `follower followee ts` per line, edges in (follower, followee) index order.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (&(u, v), ts) in &self.edges {
            let _ = writeln!(out, "{} {} {}", self.nodes[u], self.nodes[v], ts);
        }
        out
    }

    /// Parse an edge list; nodes are the sorted set of ids that appear.
    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut raw = Vec::new();
        let mut ids = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [f, t, ts] = parts[..] else {
                return Err(GraphError::Parse { line: i + 1, message: "expected `follower followee ts`".into() });
            };
            let ts: Timestamp =
                ts.parse().map_err(|_| GraphError::Parse { line: i + 1, message: format!("bad timestamp `{ts}`") })?;
            ids.insert(AgentId::from(f));
            ids.insert(AgentId::from(t));
            raw.push((AgentId::from(f), AgentId::from(t), ts));
        }
        let nodes: Vec<AgentId> = ids.into_iter().collect();
        let index: BTreeMap<AgentId, usize> = nodes.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Self::from_edges(nodes, raw.into_iter().map(|(f, t, ts)| (index[&f], index[&t], ts)))
    }
}
