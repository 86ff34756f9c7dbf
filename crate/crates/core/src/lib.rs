//! Call-graph analytics for covert Android malware detection.
//!
//! The pipeline partitions a function call graph into communities, keeps the
//! sensitive communities that are weakly coupled to the benign remainder as a
//! suspicious subgraph, turns that subgraph into sensitive-API presence and
//! sensitive-triad ratio features, and classifies apps with k-nearest
//! neighbours.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, timing and the
//! command-line interface live in the `homgraph` companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod classify;
pub mod community;
mod error;
pub mod features;
pub mod generator;
pub mod graph;
pub mod homophily;
pub mod pipeline;
pub mod rng;
pub mod triad;

pub use catalog::{match_sensitive, SensitiveApiCatalog, DESK_CATALOG};
pub use classify::{
    cross_validate, knn_predict, metrics, ConfusionCounts, CrossValReport, LabeledSample,
    MetricsReport,
};
pub use community::{
    detect_label_propagation, detect_multilevel, modularity, Algorithm, CommunityPartition,
};
pub use error::Error;
pub use features::{featurize, presence_features, ratio_features, FeatureVector};
pub use generator::{generate_corpus, PlantedTruth, SyntheticSpec};
pub use graph::{CallGraph, FunctionNode, Label, NodeId};
pub use homophily::{
    coupling, covertness, malicious_part, partition_suspicious, CouplingDenominator,
    CouplingReport, CovertnessReport, PartitionOutcome, Verdict,
};
pub use pipeline::{threshold_sweep, AnalysisConfig, SweepReport};
pub use triad::{triad_census, TriadCensus, TriadType, SELECTED_TRIADS};

pub type Result<T, E = Error> = core::result::Result<T, E>;
