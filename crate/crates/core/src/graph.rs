//! Function call graph model.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::catalog::SensitiveApiCatalog;
use crate::{Error, Result};

/// Opaque node identifier. Only equality and ascending iteration order matter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for NodeId {
    fn from(v: u64) -> Self {
        NodeId(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Benign,
    Malware,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Benign => "benign",
            Label::Malware => "malware",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "benign" => Ok(Label::Benign),
            "malware" => Ok(Label::Malware),
            _ => Err(()),
        }
    }
}

/// A function in the call graph: either an API call or a user-defined method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionNode {
    pub id: NodeId,
    /// Canonical signature, `package.Class.method` optionally followed by a descriptor.
    pub name: String,
    pub sensitive: bool,
}

impl FunctionNode {
    pub fn new(id: impl Into<NodeId>, name: impl Into<String>, sensitive: bool) -> Self {
        FunctionNode {
            id: id.into(),
            name: name.into(),
            sensitive,
        }
    }
}

/// Directed, simple function call graph.
///
/// Nodes are kept sorted by id and edges sorted by `(caller, callee)`, with
/// self-loops and parallel edges removed, so two graphs describing the same
/// calls compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallGraph {
    app_id: String,
    label: Option<Label>,
    nodes: Vec<FunctionNode>,
    edges: Vec<(NodeId, NodeId)>,
}

impl CallGraph {
    /// Validates and normalizes a graph.
    ///
    /// Rejects empty node lists, duplicate ids and edges referencing unknown
    /// nodes; the error carries the offending position in the input lists.
    pub fn new(
        app_id: impl Into<String>,
        label: Option<Label>,
        nodes: Vec<FunctionNode>,
        edges: Vec<(NodeId, NodeId)>,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut seen = BTreeSet::new();
        for (index, node) in nodes.iter().enumerate() {
            if !seen.insert(node.id) {
                return Err(Error::DuplicateNode { index, id: node.id });
            }
        }
        for (index, &(a, b)) in edges.iter().enumerate() {
            for endpoint in [a, b] {
                if !seen.contains(&endpoint) {
                    return Err(Error::DanglingEndpoint { index, endpoint });
                }
            }
        }
        Ok(Self::from_validated(app_id.into(), label, nodes, edges))
    }

    fn from_validated(
        app_id: String,
        label: Option<Label>,
        mut nodes: Vec<FunctionNode>,
        mut edges: Vec<(NodeId, NodeId)>,
    ) -> Self {
        nodes.sort_by_key(|n| n.id);
        edges.retain(|(a, b)| a != b);
        edges.sort_unstable();
        edges.dedup();
        CallGraph {
            app_id,
            label,
            nodes,
            edges,
        }
    }

    pub fn app_id(&self) -> &str {
        &self.app_id
    }

    pub fn label(&self) -> Option<Label> {
        self.label
    }

    pub fn set_label(&mut self, label: Option<Label>) {
        self.label = label;
    }

    pub fn nodes(&self) -> &[FunctionNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Position of `id` in [`nodes`](Self::nodes); this is the dense index
    /// used by the graph algorithms.
    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index_of(id).is_some()
    }

    pub fn node(&self, id: NodeId) -> Option<&FunctionNode> {
        self.index_of(id).map(|i| &self.nodes[i])
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    /// Edges as `(caller_index, callee_index)` pairs.
    pub fn indexed_edges(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&(a, b)| {
                (
                    self.index_of(a).expect("validated edge"),
                    self.index_of(b).expect("validated edge"),
                )
            })
            .collect()
    }

    /// Recomputes every node's `sensitive` flag from its name.
    pub fn apply_catalog(&mut self, catalog: &SensitiveApiCatalog) {
        for node in &mut self.nodes {
            node.sensitive = catalog.is_sensitive(&node.name);
        }
    }

    pub fn sensitive_nodes(&self) -> BTreeSet<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.sensitive)
            .map(|n| n.id)
            .collect()
    }

    /// Subgraph induced on `keep`: the kept nodes and every original directed
    /// edge with both endpoints kept. Ids not in the graph are ignored, and the
    /// result may be empty.
    pub fn induced_subgraph(&self, keep: &BTreeSet<NodeId>) -> CallGraph {
        let nodes = self
            .nodes
            .iter()
            .filter(|n| keep.contains(&n.id))
            .cloned()
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|(a, b)| keep.contains(a) && keep.contains(b))
            .copied()
            .collect();
        CallGraph {
            app_id: self.app_id.clone(),
            label: self.label,
            nodes,
            edges,
        }
    }

    /// Undirected projection: each unordered pair `{u, v}` joined by at least
    /// one directed edge appears once, as `(min, max)` node indices.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .indexed_edges()
            .into_iter()
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn undirected_adjacency(&self) -> Adjacency {
        Adjacency::from_undirected_edges(self.node_count(), &self.undirected_edges())
    }
}

/// Compressed sparse adjacency over dense node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    /// Builds symmetric adjacency from `(u, v)` pairs listed once each.
    pub fn from_undirected_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut degree = alloc::vec![0usize; n];
        for &(a, b) in edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = alloc::vec![0usize; offsets[n]];
        for &(a, b) in edges {
            targets[fill[a]] = b;
            fill[a] += 1;
            targets[fill[b]] = a;
            fill[b] += 1;
        }
        for i in 0..n {
            targets[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Adjacency { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }
}
