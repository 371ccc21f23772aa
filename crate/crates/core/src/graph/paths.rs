use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GraphError, IndexGraph};

pub const DEFAULT_SAMPLED_PAIRS: usize = 100_000;
const EXACT_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum PathPolicy {
    Exact,
    Sampled { pairs: usize, seed: u64 },
    /// Exact up to 10,000 nodes, otherwise sampled with the default pair count.
    Auto { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
    pub reachable_pairs: u64,
    pub unreachable_pairs: u64,
}

/// BFS hop distances from `s`; `None` where unreachable.
pub fn bfs_distances(g: &IndexGraph, s: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.n()];
    let mut queue = std::collections::VecDeque::new();
    dist[s] = Some(0);
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].expect("queued nodes have a distance");
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

#[derive(Default, Clone, Copy)]
struct Acc {
    sum: f64,
    sumsq: f64,
    reach: u64,
    unreach: u64,
}

impl Acc {
    fn add(mut self, o: Acc) -> Acc {
        self.sum += o.sum;
        self.sumsq += o.sumsq;
        self.reach += o.reach;
        self.unreach += o.unreach;
        self
    }

    fn push(&mut self, d: Option<u32>) {
        match d {
            Some(d) => {
                let d = d as f64;
                self.sum += d;
                self.sumsq += d * d;
                self.reach += 1;
            }
            None => self.unreach += 1,
        }
    }
}

/// Mean and sd of shortest-path lengths over ordered pairs `(u, v)`, `u != v`.
pub fn avg_shortest_path(g: &IndexGraph, policy: PathPolicy) -> Result<PathStats, GraphError> {
    let n = g.n();
    let policy = match policy {
        PathPolicy::Auto { seed } if n > EXACT_LIMIT => PathPolicy::Sampled { pairs: DEFAULT_SAMPLED_PAIRS, seed },
        PathPolicy::Auto { .. } => PathPolicy::Exact,
        p => p,
    };
    let acc = match policy {
        PathPolicy::Exact => (0..n)
            .into_par_iter()
            .map(|s| {
                let mut a = Acc::default();
                for (t, d) in bfs_distances(g, s).into_iter().enumerate() {
                    if t != s {
                        a.push(d);
                    }
                }
                a
            })
            .reduce(Acc::default, Acc::add),
        PathPolicy::Sampled { pairs, seed } => {
            if n < 2 {
                return Err(GraphError::NoReachablePairs);
            }
            let mut rng = crate::util::rng(seed);
            let mut sampled: Vec<(usize, usize)> = (0..pairs)
                .map(|_| {
                    let s = rng.gen_range(0..n);
                    let mut t = rng.gen_range(0..n - 1);
                    if t >= s {
                        t += 1;
                    }
                    (s, t)
                })
                .collect();
            sampled.sort_unstable();
            sampled
                .chunk_by(|a, b| a.0 == b.0)
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|group| {
                    let dist = bfs_distances(g, group[0].0);
                    let mut a = Acc::default();
                    for &(_, t) in group {
                        a.push(dist[t]);
                    }
                    a
                })
                .reduce(Acc::default, Acc::add)
        }
        PathPolicy::Auto { .. } => unreachable!("resolved above"),
    };
    if acc.reach == 0 {
        return Err(GraphError::NoReachablePairs);
    }
    let k = acc.reach as f64;
    let mean = acc.sum / k;
    let var = (acc.sumsq / k - mean * mean).max(0.0);
    Ok(PathStats { mean, sd: var.sqrt(), reachable_pairs: acc.reach, unreachable_pairs: acc.unreach })
}

/// Closeness with Wasserman–Faust scaling, over distances from `node`
/// (outgoing for directed graphs). Isolated nodes score 0.
pub fn closeness_centrality(g: &IndexGraph, node: usize) -> Result<f64, GraphError> {
    let n = g.n();
    if node >= n {
        return Err(GraphError::UnknownNode(node));
    }
    let (mut total, mut reach) = (0u64, 0usize);
    for d in bfs_distances(g, node).into_iter().flatten() {
        total += d as u64;
        reach += 1;
    }
    if reach <= 1 || n <= 1 {
        return Ok(0.0);
    }
    let r = (reach - 1) as f64;
    Ok(r / total as f64 * (r / (n - 1) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn floyd_warshall(g: &IndexGraph) -> Vec<Vec<Option<u32>>> {
        let n = g.n();
        let mut d = vec![vec![None; n]; n];
        for (u, row) in d.iter_mut().enumerate() {
            row[u] = Some(0);
        }
        for (u, v) in g.arcs() {
            d[u][v] = Some(1);
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                        if d[i][j].is_none_or(|c| a + b < c) {
                            d[i][j] = Some(a + b);
                        }
                    }
                }
            }
        }
        d
    }

    #[test]
    fn small_cases() {
        let path = IndexGraph::undirected(3, [(0, 1), (1, 2)]);
        let s = avg_shortest_path(&path, PathPolicy::Exact).unwrap();
        assert!((s.mean - 4.0 / 3.0).abs() < 1e-12);
        let k5 = IndexGraph::undirected(5, (0..5).flat_map(|u| (0..5).map(move |v| (u, v))));
        let s = avg_shortest_path(&k5, PathPolicy::Exact).unwrap();
        assert_eq!((s.mean, s.sd), (1.0, 0.0));
        assert_eq!(avg_shortest_path(&IndexGraph::undirected(3, []), PathPolicy::Exact), Err(GraphError::NoReachablePairs));
    }

    #[test]
    fn matches_floyd_warshall() {
        use rand::Rng;
        for seed in 0..5 {
            let mut rng = crate::util::rng(seed);
            let edges: Vec<(usize, usize)> =
                (0..60).map(|_| (rng.gen_range(0..30), rng.gen_range(0..30))).collect();
            let g = IndexGraph::directed(30, edges);
            let fw = floyd_warshall(&g);
            let ds: Vec<f64> = (0..30)
                .flat_map(|i| (0..30).filter(move |&j| j != i).map(move |j| (i, j)))
                .filter_map(|(i, j)| fw[i][j].map(f64::from))
                .collect();
            let mean = ds.iter().sum::<f64>() / ds.len() as f64;
            let sd = (ds.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / ds.len() as f64).sqrt();
            let got = avg_shortest_path(&g, PathPolicy::Exact).unwrap();
            assert!((got.mean - mean).abs() < 1e-9);
            assert!((got.sd - sd).abs() < 1e-9);
            assert_eq!(got.reachable_pairs + got.unreachable_pairs, 30 * 29);
        }
    }

    #[test]
    fn sampled_is_close_to_exact_and_deterministic() {
        let edges: Vec<(usize, usize)> = (0..200).map(|i| (i, (i * 7 + 3) % 200)).chain((0..199).map(|i| (i, i + 1))).collect();
        let g = IndexGraph::undirected(200, edges);
        let exact = avg_shortest_path(&g, PathPolicy::Exact).unwrap();
        let a = avg_shortest_path(&g, PathPolicy::Sampled { pairs: 20_000, seed: 1 }).unwrap();
        let b = avg_shortest_path(&g, PathPolicy::Sampled { pairs: 20_000, seed: 1 }).unwrap();
        assert_eq!(a, b);
        assert!((a.mean - exact.mean).abs() < 0.1);
    }

    #[test]
    fn closeness_cases() {
        let star = IndexGraph::undirected(5, [(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert!((closeness_centrality(&star, 0).unwrap() - 1.0).abs() < 1e-12);
        let path = IndexGraph::undirected(3, [(0, 1), (1, 2)]);
        assert!((closeness_centrality(&path, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((closeness_centrality(&path, 0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let iso = IndexGraph::undirected(3, [(0, 1)]);
        assert_eq!(closeness_centrality(&iso, 2).unwrap(), 0.0);
        // disconnected: node 0 reaches 1 only, n = 3 -> (1/1)·(1/2)
        assert!((closeness_centrality(&iso, 0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(closeness_centrality(&iso, 3), Err(GraphError::UnknownNode(3)));
    }
}
