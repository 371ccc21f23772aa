use std::collections::HashSet;

use rand::Rng;

use super::FollowGraph;

/// Directed double-edge swaps `(a→b, c→d) ⇒ (a→d, c→b)`, `swaps_per_edge·|E|`
/// attempts. Swaps that would create a self-loop or duplicate edge are skipped,
/// so in- and out-degree sequences are preserved exactly.
pub fn degree_preserving_random(g: &FollowGraph, seed: u64, swaps_per_edge: usize) -> FollowGraph {
    let mut edges: Vec<(usize, usize, i64)> = g.edges().collect();
    if edges.len() < 2 {
        return g.clone();
    }
    let mut present: HashSet<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let mut rng = crate::util::rng(seed);
    let attempts = swaps_per_edge * edges.len();
    let mut accepted = 0usize;
    for _ in 0..attempts {
        let i = rng.gen_range(0..edges.len());
        let j = rng.gen_range(0..edges.len());
        let ((a, b, t1), (c, d, t2)) = (edges[i], edges[j]);
        if a == c || b == d || a == d || c == b || present.contains(&(a, d)) || present.contains(&(c, b)) {
            continue;
        }
        present.remove(&(a, b));
        present.remove(&(c, d));
        present.insert((a, d));
        present.insert((c, b));
        edges[i] = (a, d, t1);
        edges[j] = (c, b, t2);
        accepted += 1;
    }
    log::debug!("rewiring accepted {accepted}/{attempts} swaps");
    FollowGraph::from_edges(g.nodes().to_vec(), edges).expect("swaps keep edges valid")
}

/// Fraction of `a`'s edges also present in `b`.
pub fn edge_overlap(a: &FollowGraph, b: &FollowGraph) -> f64 {
    if a.edge_count() == 0 {
        return 0.0;
    }
    a.edges().filter(|&(u, v, _)| b.has_edge(u, v)).count() as f64 / a.edge_count() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphView;

    fn degrees(g: &FollowGraph) -> (Vec<usize>, Vec<usize>) {
        let d = g.view(GraphView::Directed);
        ((0..d.n()).map(|u| d.out_degree(u)).collect(), d.in_degrees())
    }

    fn sample(n: usize, m: usize, seed: u64) -> FollowGraph {
        let mut rng = crate::util::rng(seed);
        let mut edges = HashSet::new();
        while edges.len() < m {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u != v {
                edges.insert((u, v));
            }
        }
        FollowGraph::from_index_edges(n, edges).unwrap()
    }

    #[test]
    fn preserves_degree_sequences() {
        for seed in 0..10 {
            let g = sample(40, 120, seed);
            let r = degree_preserving_random(&g, seed, 10);
            assert_eq!(degrees(&g), degrees(&r));
            assert_eq!(r.edge_count(), g.edge_count());
        }
    }

    #[test]
    fn four_cycle_stays_regular() {
        let g = FollowGraph::from_index_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let r = degree_preserving_random(&g, 3, 10);
        assert_eq!(degrees(&r), (vec![1; 4], vec![1; 4]));
    }

    #[test]
    fn deterministic_per_seed() {
        let g = sample(30, 80, 1);
        assert_eq!(degree_preserving_random(&g, 5, 10), degree_preserving_random(&g, 5, 10));
    }

    #[test]
    fn overlap_drops() {
        let g = sample(100, 400, 2);
        let r = degree_preserving_random(&g, 2, 10);
        assert!(edge_overlap(&g, &r) < 0.6);
    }
}
