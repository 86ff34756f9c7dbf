use alloc::string::String;

use crate::graph::{Label, NodeId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("nodes[{index}]: duplicate node id {id}")]
    DuplicateNode { index: usize, id: NodeId },
    #[error("edges[{index}]: endpoint {endpoint} is not a node of the graph")]
    DanglingEndpoint { index: usize, endpoint: NodeId },

    #[error("sensitive API catalog is empty")]
    EmptyCatalog,
    #[error("catalog line {line}: duplicate entry `{entry}`")]
    DuplicateCatalogEntry { line: usize, entry: String },

    #[error("modularity is undefined on a graph without edges")]
    EdgelessGraph,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("node {0} is not part of the graph")]
    UnknownNode(NodeId),
    #[error("parts must be non-empty")]
    EmptyPart,
    #[error("parts overlap at node {0}")]
    OverlappingParts(NodeId),
    #[error("coupling threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("graph has no sensitive nodes")]
    NoSensitiveNodes,
    #[error("malicious part covers every node of the graph")]
    MaliciousPartCoversGraph,

    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),

    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("k must be in 1..={available}, got {k}")]
    InvalidK { k: usize, available: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("class {label} has {count} samples, fewer than {folds} folds")]
    ClassTooSmall { label: Label, count: usize, folds: usize },
    #[error("graph {app_id} has no ground-truth label")]
    MissingLabel { app_id: String },
}
