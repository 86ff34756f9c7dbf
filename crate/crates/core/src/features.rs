//! Feature extraction from the suspicious subgraph.
//!
//! A feature vector has `7 · |catalog|` entries: one presence bit per catalog
//! entry, then six triad ratios per entry (catalog order outer, triad order
//! [`SELECTED_TRIADS`] inner).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::SensitiveApiCatalog;
use crate::graph::CallGraph;
use crate::homophily::PartitionOutcome;
use crate::triad::{triad_census, TriadCensus, SELECTED_TRIADS};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub presence: Vec<u8>,
    pub ratios: Vec<f64>,
}

impl FeatureVector {
    pub fn zeros(catalog_len: usize) -> Self {
        FeatureVector {
            presence: vec![0; catalog_len],
            ratios: vec![0.0; 6 * catalog_len],
        }
    }

    pub fn dimension(&self) -> usize {
        self.presence.len() + self.ratios.len()
    }

    /// Presence block followed by the ratio block.
    pub fn to_dense(&self) -> Vec<f64> {
        self.presence
            .iter()
            .map(|&b| f64::from(b))
            .chain(self.ratios.iter().copied())
            .collect()
    }

    pub fn ratio(&self, api: usize, selected: usize) -> f64 {
        self.ratios[api * SELECTED_TRIADS.len() + selected]
    }

    pub fn is_zero(&self) -> bool {
        self.presence.iter().all(|&b| b == 0) && self.ratios.iter().all(|&r| r == 0.0)
    }
}

/// Column names in dense order: `presence[i]`, then `ratio[i][TYPE]`.
pub fn feature_names(catalog_len: usize) -> Vec<String> {
    let mut names: Vec<String> = (0..catalog_len).map(|i| format!("presence[{i}]")).collect();
    for i in 0..catalog_len {
        for t in SELECTED_TRIADS {
            names.push(format!("ratio[{i}][{}]", t.code()));
        }
    }
    names
}

/// Entry `i` is 1 iff some node of `subgraph` matches catalog entry `i`.
pub fn presence_features(subgraph: &CallGraph, catalog: &SensitiveApiCatalog) -> Vec<u8> {
    let mut presence = vec![0u8; catalog.len()];
    for node in subgraph.nodes() {
        for i in catalog.matches(&node.name) {
            presence[i] = 1;
        }
    }
    presence
}

/// Sensitive-triad ratio per (catalog entry, selected type); zero where the
/// subgraph has no triad of that type.
pub fn ratio_features(census: &TriadCensus, catalog: &SensitiveApiCatalog) -> Vec<f64> {
    let mut ratios = Vec::with_capacity(6 * catalog.len());
    for api in 0..catalog.len() {
        for t in SELECTED_TRIADS {
            let total = census.total(t);
            ratios.push(if total == 0 {
                0.0
            } else {
                census.sensitive(api, t) as f64 / total as f64
            });
        }
    }
    ratios
}

pub fn featurize_subgraph(subgraph: &CallGraph, catalog: &SensitiveApiCatalog) -> FeatureVector {
    if subgraph.is_empty() {
        return FeatureVector::zeros(catalog.len());
    }
    let census = triad_census(subgraph, catalog);
    FeatureVector {
        presence: presence_features(subgraph, catalog),
        ratios: ratio_features(&census, catalog),
    }
}

pub fn featurize(outcome: &PartitionOutcome, catalog: &SensitiveApiCatalog) -> FeatureVector {
    featurize_subgraph(&outcome.suspicious_subgraph, catalog)
}
