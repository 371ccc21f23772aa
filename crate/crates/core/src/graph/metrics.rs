use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FollowGraph, GraphError, GraphView, IndexGraph};

/// Fraction of directed edges whose reverse edge also exists.
pub fn reciprocity(g: &FollowGraph) -> Result<f64, GraphError> {
    if g.edge_count() == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let reciprocated = g.edges().filter(|&(u, v, _)| g.has_edge(v, u)).count();
    Ok(reciprocated as f64 / g.edge_count() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeMode {
    In,
    Out,
    Undirected,
    Mutual,
}

/// degree -> number of nodes with that degree. Counts sum to |V|.
pub fn degree_histogram(g: &FollowGraph, mode: DegreeMode) -> BTreeMap<usize, usize> {
    let degrees: Vec<usize> = match mode {
        DegreeMode::In => g.view(GraphView::Directed).in_degrees(),
        DegreeMode::Out => {
            let d = g.view(GraphView::Directed);
            (0..d.n()).map(|u| d.out_degree(u)).collect()
        }
        DegreeMode::Undirected => {
            let u = g.view(GraphView::Undirected);
            (0..u.n()).map(|x| u.out_degree(x)).collect()
        }
        DegreeMode::Mutual => {
            let m = g.view(GraphView::Mutual);
            (0..m.n()).map(|x| m.out_degree(x)).collect()
        }
    };
    let mut hist = BTreeMap::new();
    for d in degrees {
        *hist.entry(d).or_insert(0) += 1;
    }
    hist
}

/// Local clustering coefficient `2T / (k(k-1))`; 0 when degree < 2.
///
/// Expects an undirected graph.
pub fn local_clustering(g: &IndexGraph, node: usize) -> Result<f64, GraphError> {
    if node >= g.n() {
        return Err(GraphError::UnknownNode(node));
    }
    let nbrs = g.neighbors(node);
    let k = nbrs.len();
    if k < 2 {
        return Ok(0.0);
    }
    let mut links = 0usize;
    for (i, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[i + 1..] {
            if g.has_edge(a, b) {
                links += 1;
            }
        }
    }
    Ok(2.0 * links as f64 / (k * (k - 1)) as f64)
}

/// Mean local clustering per degree.
pub fn avg_clustering_by_degree(g: &IndexGraph) -> BTreeMap<usize, f64> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for u in 0..g.n() {
        let c = local_clustering(g, u).expect("node in range");
        let e = acc.entry(g.out_degree(u)).or_insert((0.0, 0));
        e.0 += c;
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

/// Component sizes of an undirected graph, largest first.
pub fn connected_components(g: &IndexGraph) -> Vec<usize> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        stack.push(s);
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    fn random_digraph(n: usize, p: f64, seed: u64) -> FollowGraph {
        let mut rng = crate::util::rng(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        FollowGraph::from_index_edges(n, edges).unwrap()
    }

    #[test]
    fn reciprocity_cases() {
        let complete = FollowGraph::from_index_edges(3, [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]).unwrap();
        assert_eq!(reciprocity(&complete).unwrap(), 1.0);
        let star = FollowGraph::from_index_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(reciprocity(&star).unwrap(), 0.0);
        assert_eq!(reciprocity(&FollowGraph::from_index_edges(2, []).unwrap()), Err(GraphError::EmptyGraph));
    }

    #[test]
    fn reciprocity_matches_pair_scan() {
        for seed in 0..10 {
            let g = random_digraph(8, 0.35, seed);
            let edges: Vec<(usize, usize)> = g.edges().map(|(u, v, _)| (u, v)).collect();
            if edges.is_empty() {
                continue;
            }
            // O(E^2) scan
            let mut hits = 0;
            for &(u, v) in &edges {
                if edges.iter().any(|&(a, b)| a == v && b == u) {
                    hits += 1;
                }
            }
            assert_eq!(reciprocity(&g).unwrap(), hits as f64 / edges.len() as f64);
        }
    }

    #[test]
    fn mutualized_graph_is_fully_reciprocal() {
        let g = random_digraph(10, 0.3, 4);
        let m = g.view(GraphView::Mutual);
        let mutualized = FollowGraph::from_index_edges(m.n(), m.arcs()).unwrap();
        if mutualized.edge_count() > 0 {
            assert_eq!(reciprocity(&mutualized).unwrap(), 1.0);
        }
    }

    #[test]
    fn degree_histograms() {
        let cycle = FollowGraph::from_index_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(degree_histogram(&cycle, DegreeMode::In), BTreeMap::from([(1, 3)]));
        assert!(degree_histogram(&FollowGraph::default(), DegreeMode::Out).is_empty());
        let g = random_digraph(50, 0.1, 7);
        for mode in [DegreeMode::In, DegreeMode::Out, DegreeMode::Undirected, DegreeMode::Mutual] {
            let hist = degree_histogram(&g, mode);
            assert_eq!(hist.values().sum::<usize>(), 50);
            // adjacency recount
            let mut counts = vec![0usize; 50];
            for (u, v, _) in g.edges() {
                match mode {
                    DegreeMode::In => counts[v] += 1,
                    DegreeMode::Out => counts[u] += 1,
                    DegreeMode::Undirected => {
                        if !g.has_edge(v, u) || u < v {
                            counts[u] += 1;
                            counts[v] += 1;
                        }
                    }
                    DegreeMode::Mutual => {
                        if g.has_edge(v, u) && u < v {
                            counts[u] += 1;
                            counts[v] += 1;
                        }
                    }
                }
            }
            let mut want = BTreeMap::new();
            for c in counts {
                *want.entry(c).or_insert(0) += 1;
            }
            assert_eq!(hist, want, "{mode:?}");
        }
    }

    #[test]
    fn clustering_cases() {
        let tri = IndexGraph::undirected(3, [(0, 1), (1, 2), (2, 0)]);
        for u in 0..3 {
            assert_eq!(local_clustering(&tri, u).unwrap(), 1.0);
        }
        let star = IndexGraph::undirected(4, [(0, 1), (0, 2), (0, 3)]);
        assert_eq!(local_clustering(&star, 0).unwrap(), 0.0);
        assert_eq!(local_clustering(&star, 1).unwrap(), 0.0);
        assert_eq!(local_clustering(&star, 9), Err(GraphError::UnknownNode(9)));
        let by_deg = avg_clustering_by_degree(&star);
        assert_eq!(by_deg, BTreeMap::from([(1, 0.0), (3, 0.0)]));
    }

    #[test]
    fn components_cases() {
        let two = IndexGraph::undirected(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        assert_eq!(connected_components(&two), vec![3, 3]);
        let path = IndexGraph::undirected(5, [(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(connected_components(&path), vec![5]);
        let isolated = IndexGraph::undirected(3, []);
        assert_eq!(connected_components(&isolated), vec![1, 1, 1]);
    }
}
