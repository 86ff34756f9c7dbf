//! Asynchronous label propagation.

use alloc::vec;
use alloc::vec::Vec;

use super::CommunityPartition;
use crate::graph::CallGraph;
use crate::rng::sweep_order;

/// Sweep cap when no fixpoint is reached.
pub const MAX_SWEEPS: usize = 100;

/// Every node starts with its own label; in each sweep a node adopts the
/// label most frequent among its neighbours, the smallest such label on
/// ties. Stops at a fixpoint or after [`MAX_SWEEPS`] sweeps. Isolated nodes
/// keep their own label.
pub fn detect_label_propagation(graph: &CallGraph, seed: u64) -> CommunityPartition {
    let n = graph.node_count();
    let adj = graph.undirected_adjacency();
    let order = sweep_order(n, seed);
    let mut labels: Vec<usize> = (0..n).collect();
    let mut counts = vec![0usize; n];
    let mut seen: Vec<usize> = Vec::new();

    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for &i in &order {
            let neighbors = adj.neighbors(i);
            if neighbors.is_empty() {
                continue;
            }
            for &j in neighbors {
                let l = labels[j];
                if counts[l] == 0 {
                    seen.push(l);
                }
                counts[l] += 1;
            }
            let mut best = usize::MAX;
            let mut best_count = 0;
            for &l in &seen {
                let c = counts[l];
                if c > best_count || (c == best_count && l < best) {
                    best = l;
                    best_count = c;
                }
            }
            for &l in &seen {
                counts[l] = 0;
            }
            seen.clear();
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    CommunityPartition::from_labels(graph, &labels).expect("labels match node count")
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn barbell_splits_into_cliques() {
        let p = detect_label_propagation(&barbell(), 0);
        assert_eq!(p.assignment(), &[0, 0, 0, 0, 1, 1, 1, 1]);
        assert!((p.modularity_q() - (12.0 / 13.0 - 0.5)).abs() < 1e-9);
    }

    #[test]
    fn complete_graph_is_one_community() {
        for seed in 0..5 {
            assert_eq!(detect_label_propagation(&complete(5), seed).community_count(), 1);
        }
    }

    #[test]
    fn edgeless_graph_gives_singletons() {
        let p = detect_label_propagation(&graph(4, &[]), 0);
        assert_eq!(p.community_count(), 4);
        assert_eq!(p.modularity_q(), 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let g = triangle_ring(7);
        assert_eq!(
            detect_label_propagation(&g, 5),
            detect_label_propagation(&g, 5)
        );
    }
}
