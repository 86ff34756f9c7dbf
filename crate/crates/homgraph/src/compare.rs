//! Side-by-side run of the community detectors over a corpus.

use std::time::{Duration, Instant};

use homgraph_core::{Algorithm, CallGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub mean_q: f64,
    pub mean_communities: f64,
    pub mean_runtime: Duration,
    /// Q per graph, in corpus order.
    pub per_graph_q: Vec<f64>,
}

pub const ALGORITHMS: [Algorithm; 2] = [Algorithm::Multilevel, Algorithm::LabelPropagation];

/// Runs both detectors on every graph, sequentially so timings are not
/// skewed by contention.
pub fn compare_algorithms(graphs: &[CallGraph], seed: u64) -> Vec<AlgorithmSummary> {
    ALGORITHMS
        .iter()
        .map(|&algorithm| {
            let mut per_graph_q = Vec::with_capacity(graphs.len());
            let mut communities = 0usize;
            let mut elapsed = Duration::ZERO;
            for g in graphs {
                let start = Instant::now();
                let p = algorithm.detect(g, seed);
                elapsed += start.elapsed();
                per_graph_q.push(p.modularity_q());
                communities += p.community_count();
            }
            let n = graphs.len().max(1);
            AlgorithmSummary {
                algorithm,
                mean_q: per_graph_q.iter().sum::<f64>() / n as f64,
                mean_communities: communities as f64 / n as f64,
                mean_runtime: elapsed / n as u32,
                per_graph_q,
            }
        })
        .collect()
}
