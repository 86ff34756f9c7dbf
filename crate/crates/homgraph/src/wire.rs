//! JSON wire format for call graphs.
//!
//! ```json
//! {"app_id":"demo","label":"malware",
//!  "nodes":[{"id":0,"name":"com.example.Main.run","sensitive":false}],
//!  "edges":[[0,0]]}
//! ```
//!
//! `label` and `sensitive` are optional. Edges are `[caller, callee]` pairs.

use homgraph_core::{CallGraph, FunctionNode, Label, NodeId, SensitiveApiCatalog};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(#[from] homgraph_core::Error),
}

impl From<serde_json::Error> for WireError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends " at line L column C"; keep only the message.
        let message = match message.rfind(" at line ") {
            Some(cut) => message[..cut].to_string(),
            None => message,
        };
        WireError::Malformed {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    app_id: String,
    #[serde(default, alias = "ground_truth", skip_serializing_if = "Option::is_none")]
    label: Option<LabelDoc>,
    nodes: Vec<NodeDoc>,
    edges: Vec<[u64; 2]>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LabelDoc {
    Benign,
    Malware,
}

impl From<LabelDoc> for Label {
    fn from(l: LabelDoc) -> Self {
        match l {
            LabelDoc::Benign => Label::Benign,
            LabelDoc::Malware => Label::Malware,
        }
    }
}

impl From<Label> for LabelDoc {
    fn from(l: Label) -> Self {
        match l {
            Label::Benign => LabelDoc::Benign,
            Label::Malware => LabelDoc::Malware,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: u64,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sensitive: Option<bool>,
}

/// How node sensitivity is settled after parsing.
#[derive(Debug, Clone, Copy)]
pub enum Sensitivity<'a> {
    /// Keep the document's flags; nodes without one are not sensitive.
    AsGiven,
    /// Match every node name against the catalog.
    Catalog(&'a SensitiveApiCatalog),
    /// Keep explicit flags and match the remaining nodes against the catalog.
    FlagsThenCatalog(&'a SensitiveApiCatalog),
}

/// Parses and normalizes a graph document, keeping its sensitivity flags.
pub fn parse_graph(bytes: &[u8]) -> Result<CallGraph, WireError> {
    parse_graph_with(bytes, Sensitivity::AsGiven)
}

pub fn parse_graph_with(bytes: &[u8], sensitivity: Sensitivity<'_>) -> Result<CallGraph, WireError> {
    let doc: GraphDoc = serde_json::from_slice(bytes)?;
    let nodes = doc
        .nodes
        .into_iter()
        .map(|n| {
            let sensitive = match sensitivity {
                Sensitivity::AsGiven => n.sensitive.unwrap_or(false),
                Sensitivity::Catalog(cat) => cat.is_sensitive(&n.name),
                Sensitivity::FlagsThenCatalog(cat) => {
                    n.sensitive.unwrap_or_else(|| cat.is_sensitive(&n.name))
                }
            };
            FunctionNode::new(n.id, n.name, sensitive)
        })
        .collect();
    let edges = doc
        .edges
        .into_iter()
        .map(|[a, b]| (NodeId(a), NodeId(b)))
        .collect();
    Ok(CallGraph::new(
        doc.app_id,
        doc.label.map(Label::from),
        nodes,
        edges,
    )?)
}

/// Compact, deterministic encoding with nodes and edges in ascending order.
pub fn serialize_graph(graph: &CallGraph) -> String {
    let doc = GraphDoc {
        app_id: graph.app_id().to_string(),
        label: graph.label().map(LabelDoc::from),
        nodes: graph
            .nodes()
            .iter()
            .map(|n| NodeDoc {
                id: n.id.0,
                name: n.name.clone(),
                sensitive: Some(n.sensitive),
            })
            .collect(),
        edges: graph.edges().iter().map(|&(a, b)| [a.0, b.0]).collect(),
    };
    let mut out = serde_json::to_string(&doc).expect("graph documents always serialize");
    out.push('\n');
    out
}
