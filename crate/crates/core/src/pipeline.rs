//! End-to-end analysis of one graph and threshold sweeps over a corpus.

use alloc::string::String;
use alloc::vec::Vec;

use crate::catalog::SensitiveApiCatalog;
use crate::classify::{cross_validate, CrossValReport, LabeledSample};
use crate::community::{Algorithm, CommunityPartition};
use crate::features::{featurize, FeatureVector};
use crate::graph::CallGraph;
use crate::homophily::{
    partition_suspicious, CouplingDenominator, PartitionOutcome, DEFAULT_HOPS, DEFAULT_THRESHOLD,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub threshold: f64,
    pub algorithm: Algorithm,
    pub k: usize,
    pub folds: usize,
    pub seed: u64,
    pub denominator: CouplingDenominator,
    pub hops: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            threshold: DEFAULT_THRESHOLD,
            algorithm: Algorithm::Multilevel,
            k: 1,
            folds: 10,
            seed: 0,
            denominator: CouplingDenominator::Total,
            hops: DEFAULT_HOPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub partition: CommunityPartition,
    pub outcome: PartitionOutcome,
    pub features: FeatureVector,
}

/// Community detection, suspicious-subgraph selection and featurization.
pub fn analyze(
    graph: &CallGraph,
    catalog: &SensitiveApiCatalog,
    config: &AnalysisConfig,
) -> Result<Analysis> {
    let partition = config.algorithm.detect(graph, config.seed);
    analyze_partitioned(graph, partition, catalog, config)
}

/// [`analyze`] with communities already detected.
pub fn analyze_partitioned(
    graph: &CallGraph,
    partition: CommunityPartition,
    catalog: &SensitiveApiCatalog,
    config: &AnalysisConfig,
) -> Result<Analysis> {
    let outcome = partition_suspicious(graph, &partition, config.threshold, config.denominator)?;
    let features = featurize(&outcome, catalog);
    Ok(Analysis {
        partition,
        outcome,
        features,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphFailure {
    pub app_id: String,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub threshold: f64,
    pub report: CrossValReport,
    /// Graphs excluded at this threshold.
    pub failures: Vec<GraphFailure>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

/// Labelled feature vectors of `corpus` at `config.threshold`. Graphs that
/// are unlabelled or fail to partition are returned separately.
pub fn labeled_samples(
    corpus: &[(&CallGraph, &CommunityPartition)],
    catalog: &SensitiveApiCatalog,
    config: &AnalysisConfig,
) -> (Vec<LabeledSample>, Vec<GraphFailure>) {
    let mut samples = Vec::with_capacity(corpus.len());
    let mut failures = Vec::new();
    for &(graph, partition) in corpus {
        let fail = |error| GraphFailure {
            app_id: graph.app_id().into(),
            error,
        };
        let Some(label) = graph.label() else {
            failures.push(fail(Error::MissingLabel {
                app_id: graph.app_id().into(),
            }));
            continue;
        };
        match partition_suspicious(graph, partition, config.threshold, config.denominator) {
            Ok(outcome) => samples.push(LabeledSample {
                app_id: graph.app_id().into(),
                label,
                vector: featurize(&outcome, catalog).to_dense(),
            }),
            Err(error) => failures.push(fail(error)),
        }
    }
    (samples, failures)
}

/// Cross-validates the corpus once per threshold. Communities are detected
/// once per graph and reused for every threshold.
pub fn threshold_sweep(
    corpus: &[CallGraph],
    catalog: &SensitiveApiCatalog,
    config: &AnalysisConfig,
    thresholds: &[f64],
) -> Result<SweepReport> {
    if thresholds.is_empty() {
        return Ok(SweepReport::default());
    }
    let partitions: Vec<CommunityPartition> = corpus
        .iter()
        .map(|g| config.algorithm.detect(g, config.seed))
        .collect();
    let pairs: Vec<(&CallGraph, &CommunityPartition)> = corpus.iter().zip(&partitions).collect();
    threshold_sweep_partitioned(&pairs, catalog, config, thresholds)
}

pub fn threshold_sweep_partitioned(
    corpus: &[(&CallGraph, &CommunityPartition)],
    catalog: &SensitiveApiCatalog,
    config: &AnalysisConfig,
    thresholds: &[f64],
) -> Result<SweepReport> {
    let mut rows = Vec::with_capacity(thresholds.len());
    for &threshold in thresholds {
        let at = AnalysisConfig {
            threshold,
            ..*config
        };
        let (samples, failures) = labeled_samples(corpus, catalog, &at);
        let report = cross_validate(&samples, config.folds, config.k, config.seed)?;
        rows.push(SweepRow {
            threshold,
            report,
            failures,
        });
    }
    Ok(SweepReport { rows })
}
