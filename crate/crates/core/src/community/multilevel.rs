//! Multilevel (Louvain) modularity optimization.
//!
//! Each pass runs local moving until a sweep gains no more than [`MIN_GAIN`],
//! then collapses communities into weighted super-nodes. Passes repeat until
//! modularity stops improving by more than [`MIN_GAIN`].

use alloc::vec;
use alloc::vec::Vec;

use super::{modularity_of, CommunityPartition};
use crate::graph::CallGraph;
use crate::rng::sweep_order;

/// Minimum modularity improvement for another sweep or pass.
pub const MIN_GAIN: f64 = 1e-7;

/// A single move must beat staying put by more than this.
const MOVE_EPS: f64 = 1e-12;

const MAX_SWEEPS_PER_PASS: usize = 1000;

/// Output of [`detect_multilevel_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct MultilevelTrace {
    pub partition: CommunityPartition,
    /// Modularity of the singleton partition followed by the modularity after
    /// each completed pass, all measured on the input graph.
    pub pass_q: Vec<f64>,
}

pub fn detect_multilevel(graph: &CallGraph, seed: u64) -> CommunityPartition {
    detect_multilevel_traced(graph, seed).partition
}

pub fn detect_multilevel_traced(graph: &CallGraph, seed: u64) -> MultilevelTrace {
    let n = graph.node_count();
    let edges = graph.undirected_edges();
    if edges.is_empty() {
        return MultilevelTrace {
            partition: CommunityPartition::singletons(graph),
            pass_q: vec![0.0],
        };
    }

    let mut membership: Vec<usize> = (0..n).collect();
    let mut level = Level::from_edges(n, &edges);
    let mut pass_q = vec![modularity_of(&edges, &membership, n)];

    loop {
        let order = sweep_order(level.n, seed);
        let (local, moved) = level.local_moving(&order);
        if !moved {
            break;
        }
        let (dense, k) = super::densify(&local);
        for c in membership.iter_mut() {
            *c = dense[*c];
        }
        let q = modularity_of(&edges, &membership, k);
        let prev = *pass_q.last().unwrap();
        debug_assert!(q >= prev - 1e-9, "modularity decreased: {prev} -> {q}");
        pass_q.push(q);
        if q - prev <= MIN_GAIN || k == level.n {
            break;
        }
        level = level.aggregate(&dense, k);
    }

    let partition =
        CommunityPartition::from_labels(graph, &membership).expect("membership covers graph");
    MultilevelTrace { partition, pass_q }
}

/// Weighted undirected graph at one aggregation level.
struct Level {
    n: usize,
    /// Neighbours other than the node itself; each edge is listed at both ends.
    adj: Vec<Vec<(usize, f64)>>,
    /// Weight of edges collapsed inside each super-node, counted once.
    self_loops: Vec<f64>,
    degree: Vec<f64>,
    /// Twice the total edge weight.
    m2: f64,
}

impl Level {
    fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push((b, 1.0));
            adj[b].push((a, 1.0));
        }
        Self::new(adj, vec![0.0; n])
    }

    fn new(adj: Vec<Vec<(usize, f64)>>, self_loops: Vec<f64>) -> Self {
        let degree: Vec<f64> = adj
            .iter()
            .zip(&self_loops)
            .map(|(nb, &l)| nb.iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * l)
            .collect();
        let m2 = degree.iter().sum();
        Level {
            n: adj.len(),
            adj,
            self_loops,
            degree,
            m2,
        }
    }

    fn quality(&self, community: &[usize], tot: &[f64]) -> f64 {
        let m = self.m2 / 2.0;
        let mut internal = vec![0.0f64; self.n];
        for i in 0..self.n {
            internal[community[i]] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                if i < j && community[i] == community[j] {
                    internal[community[i]] += w;
                }
            }
        }
        internal
            .iter()
            .zip(tot)
            .map(|(&ic, &tc)| ic / m - (tc / self.m2) * (tc / self.m2))
            .sum()
    }

    /// Returns the community of every node and whether any node moved.
    fn local_moving(&self, order: &[usize]) -> (Vec<usize>, bool) {
        let mut community: Vec<usize> = (0..self.n).collect();
        let mut tot = self.degree.clone();
        let mut weight_to = vec![0.0f64; self.n];
        let mut touched_flag = vec![false; self.n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_moved = false;
        let mut q = self.quality(&community, &tot);

        for _ in 0..MAX_SWEEPS_PER_PASS {
            let mut moved = false;
            for &i in order {
                let home = community[i];
                let k_i = self.degree[i];

                touched.push(home);
                touched_flag[home] = true;
                for &(j, w) in &self.adj[i] {
                    let c = community[j];
                    weight_to[c] += w;
                    if !touched_flag[c] {
                        touched_flag[c] = true;
                        touched.push(c);
                    }
                }
                touched.sort_unstable();

                tot[home] -= k_i;
                let gain = |c: usize| weight_to[c] - tot[c] * k_i / self.m2;
                let mut best = home;
                let mut best_gain = gain(home);
                for &c in &touched {
                    let g = gain(c);
                    if g > best_gain + MOVE_EPS {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k_i;
                if best != home {
                    community[i] = best;
                    moved = true;
                    any_moved = true;
                }

                for &c in &touched {
                    weight_to[c] = 0.0;
                    touched_flag[c] = false;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            let next = self.quality(&community, &tot);
            let gained = next - q;
            q = next;
            if gained <= MIN_GAIN {
                break;
            }
        }
        (community, any_moved)
    }

    /// Collapses each community into one node. `dense` maps node → community
    /// in `0..k`.
    fn aggregate(&self, dense: &[usize], k: usize) -> Level {
        let mut self_loops = vec![0.0f64; k];
        let mut pairs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
        for i in 0..self.n {
            let ci = dense[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                if i < j {
                    let cj = dense[j];
                    if ci == cj {
                        self_loops[ci] += w;
                    } else {
                        pairs[ci].push((cj, w));
                        pairs[cj].push((ci, w));
                    }
                }
            }
        }
        let adj = pairs
            .into_iter()
            .map(|mut list| {
                list.sort_unstable_by_key(|&(c, _)| c);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(list.len());
                for (c, w) in list {
                    match merged.last_mut() {
                        Some(last) if last.0 == c => last.1 += w,
                        _ => merged.push((c, w)),
                    }
                }
                merged
            })
            .collect();
        Level::new(adj, self_loops)
    }
}
