use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GraphError, IndexGraph};

/// Community assignment; ids are dense and numbered by smallest member node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub modularity: f64,
}

impl Partition {
    pub fn n_communities(&self) -> usize {
        self.assignment.iter().max().map_or(0, |m| m + 1)
    }

    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_communities()];
        for (u, &c) in self.assignment.iter().enumerate() {
            out[c].push(u);
        }
        out
    }
}

fn relabel(raw: &[usize]) -> Vec<usize> {
    let mut ids = BTreeMap::new();
    raw.iter()
        .map(|&c| {
            let next = ids.len();
            *ids.entry(c).or_insert(next)
        })
        .collect()
}

/// Newman modularity of `assignment` on an undirected graph.
pub fn modularity(g: &IndexGraph, assignment: &[usize]) -> Result<f64, GraphError> {
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return Err(GraphError::EmptyGraph);
    }
    let k = assignment.iter().max().map_or(0, |x| x + 1);
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for u in 0..g.n() {
        degree[assignment[u]] += g.out_degree(u) as f64;
        for &v in g.neighbors(u) {
            if assignment[u] == assignment[v] {
                internal[assignment[u]] += 0.5;
            }
        }
    }
    Ok(internal.iter().zip(&degree).map(|(l, d)| l / m - (d / (2.0 * m)).powi(2)).sum())
}

/// Clauset–Newman–Moore agglomeration. Merges the adjacent pair with the
/// largest gain until no adjacent pairs remain and returns the peak partition.
pub fn greedy_modularity_communities(g: &IndexGraph) -> Result<Partition, GraphError> {
    let n = g.n();
    let m2 = 2.0 * g.edge_count() as f64;
    if m2 == 0.0 {
        return Err(GraphError::EmptyGraph);
    }
    // e[i][j]: fraction of edge ends from community i to j (i != j); a[i]: degree share.
    let mut e: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    let mut a = vec![0.0; n];
    for u in 0..n {
        a[u] = g.out_degree(u) as f64 / m2;
        for &v in g.neighbors(u) {
            *e[u].entry(v).or_insert(0.0) += 1.0 / m2;
        }
    }
    let mut alive = vec![true; n];
    let mut q: f64 = -a.iter().map(|x| x * x).sum::<f64>();
    let mut merges = Vec::new();
    let (mut best_q, mut best_step) = (q, 0usize);
    loop {
        let mut pick: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            for (&j, &eij) in e[i].range(i + 1..) {
                let dq = 2.0 * (eij - a[i] * a[j]);
                if pick.is_none_or(|(b, _, _)| dq > b + 1e-14) {
                    pick = Some((dq, i, j));
                }
            }
        }
        let Some((dq, i, j)) = pick else { break };
        // fold j into i
        let row_j = std::mem::take(&mut e[j]);
        for (k, w) in row_j {
            if k == i {
                continue;
            }
            *e[i].entry(k).or_insert(0.0) += w;
            let rk = &mut e[k];
            rk.remove(&j);
            *rk.entry(i).or_insert(0.0) += w;
        }
        e[i].remove(&j);
        a[i] += a[j];
        a[j] = 0.0;
        alive[j] = false;
        q += dq;
        merges.push((i, j));
        if q > best_q + 1e-12 {
            best_q = q;
            best_step = merges.len();
        }
    }
    let mut owner: Vec<usize> = (0..n).collect();
    for &(i, j) in &merges[..best_step] {
        for o in owner.iter_mut() {
            if *o == j {
                *o = i;
            }
        }
    }
    let assignment = relabel(&owner);
    let modularity = modularity(g, &assignment)?;
    Ok(Partition { assignment, modularity })
}
