//! Community detection on the undirected projection of a call graph.
//!
//! Two detectors are provided: multilevel modularity optimization (Louvain)
//! and asynchronous label propagation. Both are deterministic for a given
//! `(graph, seed)`: seed 0 sweeps nodes in ascending id order, any other seed
//! visits them in a ChaCha8-permuted order. Ties go to the smallest candidate
//! community or label.

mod label_propagation;
mod multilevel;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::graph::{CallGraph, NodeId};
use crate::{Error, Result};

pub use label_propagation::{detect_label_propagation, MAX_SWEEPS};
pub use multilevel::{detect_multilevel, detect_multilevel_traced, MultilevelTrace, MIN_GAIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    #[default]
    Multilevel,
    LabelPropagation,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Multilevel => "multilevel",
            Algorithm::LabelPropagation => "label_propagation",
        }
    }

    pub fn detect(self, graph: &CallGraph, seed: u64) -> CommunityPartition {
        match self {
            Algorithm::Multilevel => detect_multilevel(graph, seed),
            Algorithm::LabelPropagation => detect_label_propagation(graph, seed),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "multilevel" => Ok(Algorithm::Multilevel),
            "label_propagation" => Ok(Algorithm::LabelPropagation),
            _ => Err(()),
        }
    }
}

/// Assignment of every node to exactly one community, with dense community
/// ids starting at 0, plus the partition's modularity.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityPartition {
    node_ids: Vec<NodeId>,
    assignment: Vec<usize>,
    community_count: usize,
    modularity_q: f64,
}

impl CommunityPartition {
    /// Builds a partition from per-node labels aligned with `graph.nodes()`.
    ///
    /// Labels are renumbered densely in order of first appearance, and the
    /// modularity is computed (0 for an edgeless graph).
    pub fn from_labels(graph: &CallGraph, labels: &[usize]) -> Result<Self> {
        if labels.len() != graph.node_count() {
            return Err(Error::InvalidPartition(format!(
                "{} labels for {} nodes",
                labels.len(),
                graph.node_count()
            )));
        }
        let (assignment, community_count) = densify(labels);
        let mut partition = CommunityPartition {
            node_ids: graph.node_ids().collect(),
            assignment,
            community_count,
            modularity_q: 0.0,
        };
        partition.modularity_q = match modularity(graph, &partition) {
            Ok(q) => q,
            Err(Error::EdgelessGraph) => 0.0,
            Err(e) => return Err(e),
        };
        Ok(partition)
    }

    /// Builds a partition from an explicit node → community map, which must
    /// cover exactly the graph's nodes.
    pub fn from_map(graph: &CallGraph, map: &BTreeMap<NodeId, usize>) -> Result<Self> {
        if map.len() != graph.node_count() {
            return Err(Error::InvalidPartition(format!(
                "{} assignments for {} nodes",
                map.len(),
                graph.node_count()
            )));
        }
        let mut labels = Vec::with_capacity(map.len());
        for id in graph.node_ids() {
            match map.get(&id) {
                Some(&c) => labels.push(c),
                None => {
                    return Err(Error::InvalidPartition(format!("node {id} is not assigned")))
                }
            }
        }
        Self::from_labels(graph, &labels)
    }

    /// Builds a partition from disjoint node groups covering the graph.
    pub fn from_groups(graph: &CallGraph, groups: &[BTreeSet<NodeId>]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (c, group) in groups.iter().enumerate() {
            for &id in group {
                if map.insert(id, c).is_some() {
                    return Err(Error::InvalidPartition(format!(
                        "node {id} appears in more than one group"
                    )));
                }
            }
        }
        Self::from_map(graph, &map)
    }

    pub fn singletons(graph: &CallGraph) -> Self {
        let labels: Vec<usize> = (0..graph.node_count()).collect();
        Self::from_labels(graph, &labels).expect("labels match node count")
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn modularity_q(&self) -> f64 {
        self.modularity_q
    }

    /// Community of each node, aligned with the graph's ascending node order.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_of(&self, id: NodeId) -> Option<usize> {
        self.node_ids
            .binary_search(&id)
            .ok()
            .map(|i| self.assignment[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.node_ids.iter().copied().zip(self.assignment.iter().copied())
    }

    /// Member sets, indexed by community id.
    pub fn communities(&self) -> Vec<BTreeSet<NodeId>> {
        let mut out = vec![BTreeSet::new(); self.community_count];
        for (id, c) in self.iter() {
            out[c].insert(id);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.community_count];
        for &c in &self.assignment {
            out[c] += 1;
        }
        out
    }

    fn check_matches(&self, graph: &CallGraph) -> Result<()> {
        if self.node_ids.len() != graph.node_count()
            || !self.node_ids.iter().copied().eq(graph.node_ids())
        {
            return Err(Error::InvalidPartition(
                "partition does not cover the graph's nodes".into(),
            ));
        }
        Ok(())
    }
}

fn densify(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut remap = BTreeMap::new();
    let assignment = labels
        .iter()
        .map(|&l| {
            let next = remap.len();
            *remap.entry(l).or_insert(next)
        })
        .collect();
    (assignment, remap.len())
}

/// Newman modularity of `partition` on the undirected projection of `graph`:
/// `Q = Σ_c (m_c / m − (d_c / 2m)²)`.
pub fn modularity(graph: &CallGraph, partition: &CommunityPartition) -> Result<f64> {
    partition.check_matches(graph)?;
    let edges = graph.undirected_edges();
    if edges.is_empty() {
        return Err(Error::EdgelessGraph);
    }
    Ok(modularity_of(&edges, &partition.assignment, partition.community_count))
}

pub(crate) fn modularity_of(edges: &[(usize, usize)], assignment: &[usize], k: usize) -> f64 {
    let m = edges.len() as f64;
    let mut internal = vec![0.0f64; k];
    let mut degree = vec![0.0f64; k];
    for &(a, b) in edges {
        let (ca, cb) = (assignment[a], assignment[b]);
        degree[ca] += 1.0;
        degree[cb] += 1.0;
        if ca == cb {
            internal[ca] += 1.0;
        }
    }
    internal
        .iter()
        .zip(&degree)
        .map(|(&mc, &dc)| mc / m - (dc / (2.0 * m)) * (dc / (2.0 * m)))
        .sum()
}
