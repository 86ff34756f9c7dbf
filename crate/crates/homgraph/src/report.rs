//! Structured JSON reports written by the subcommands.

use homgraph_core::classify::{ConfusionCounts, CrossValReport, MetricsReport};
use homgraph_core::homophily::{CovertnessReport, PartitionOutcome};
use homgraph_core::pipeline::{AnalysisConfig, GraphFailure};
use homgraph_core::{CallGraph, CommunityPartition, CouplingReport};
use serde::{Serialize, Serializer};

/// Serializes non-finite values as the strings "inf", "-inf" and "nan",
/// which plain JSON numbers cannot carry.
fn real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("reports always serialize");
    out.push('\n');
    out
}

#[derive(Debug, Serialize)]
pub struct Coupling {
    pub n_a: usize,
    pub n_b: usize,
    pub e_a: usize,
    pub e_b: usize,
    pub s: usize,
    #[serde(serialize_with = "real")]
    pub c: f64,
}

impl From<&CouplingReport> for Coupling {
    fn from(r: &CouplingReport) -> Self {
        Coupling {
            n_a: r.n_a,
            n_b: r.n_b,
            e_a: r.e_a,
            e_b: r.e_b,
            s: r.s,
            c: r.c,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SettingsEcho {
    pub algorithm: &'static str,
    pub seed: u64,
    pub threshold: f64,
    pub coupling_denominator: &'static str,
}

impl From<&AnalysisConfig> for SettingsEcho {
    fn from(c: &AnalysisConfig) -> Self {
        SettingsEcho {
            algorithm: c.algorithm.as_str(),
            seed: c.seed,
            threshold: c.threshold,
            coupling_denominator: c.denominator.as_str(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SensitiveCommunityReport {
    pub community_id: usize,
    pub size: usize,
    pub sensitive_nodes: Vec<u64>,
    pub coupling: Coupling,
    pub verdict: &'static str,
}

#[derive(Debug, Serialize)]
pub struct PartitionReport {
    pub app_id: String,
    pub settings: SettingsEcho,
    pub node_count: usize,
    pub edge_count: usize,
    pub community_count: usize,
    pub modularity_q: f64,
    pub benign_node_count: usize,
    pub sensitive_community_count: usize,
    pub sensitive_communities: Vec<SensitiveCommunityReport>,
    pub suspicious_nodes: Vec<u64>,
    pub suspicious_edge_count: usize,
}

impl PartitionReport {
    pub fn new(
        graph: &CallGraph,
        partition: &CommunityPartition,
        outcome: &PartitionOutcome,
        config: &AnalysisConfig,
    ) -> Self {
        let sensitive_communities: Vec<SensitiveCommunityReport> = outcome
            .sensitive_communities
            .iter()
            .map(|sc| SensitiveCommunityReport {
                community_id: sc.community_id,
                size: sc.nodes.len(),
                sensitive_nodes: sc
                    .nodes
                    .iter()
                    .filter(|id| graph.node(**id).is_some_and(|n| n.sensitive))
                    .map(|id| id.0)
                    .collect(),
                coupling: Coupling::from(&sc.coupling),
                verdict: sc.verdict.as_str(),
            })
            .collect();
        PartitionReport {
            app_id: graph.app_id().to_string(),
            settings: config.into(),
            node_count: graph.node_count(),
            edge_count: graph.edge_count(),
            community_count: partition.community_count(),
            modularity_q: partition.modularity_q(),
            benign_node_count: outcome.benign_nodes.len(),
            sensitive_community_count: sensitive_communities.len(),
            sensitive_communities,
            suspicious_nodes: outcome.suspicious_subgraph.node_ids().map(|id| id.0).collect(),
            suspicious_edge_count: outcome.suspicious_subgraph.edge_count(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CovertnessFileReport {
    pub app_id: String,
    pub hops: usize,
    pub coupling_denominator: &'static str,
    pub node_count: usize,
    pub malicious_count: usize,
    pub malicious_nodes: Vec<u64>,
    pub proportion: f64,
    pub category: &'static str,
    pub coupling_normal_malicious: Coupling,
    pub covert_candidate: bool,
}

impl CovertnessFileReport {
    pub fn new(graph: &CallGraph, r: &CovertnessReport, config: &AnalysisConfig) -> Self {
        CovertnessFileReport {
            app_id: graph.app_id().to_string(),
            hops: config.hops,
            coupling_denominator: config.denominator.as_str(),
            node_count: graph.node_count(),
            malicious_count: r.malicious_nodes.len(),
            malicious_nodes: r.malicious_nodes.iter().map(|id| id.0).collect(),
            proportion: r.proportion,
            category: r.category.as_str(),
            coupling_normal_malicious: Coupling::from(&r.coupling_normal_malicious),
            covert_candidate: r.covert_candidate,
        }
    }
}

/// Rate names as abbreviated in results tables.
#[derive(Debug, Serialize)]
pub struct Rates {
    #[serde(rename = "TPR")]
    pub tpr: f64,
    #[serde(rename = "FNR")]
    pub fnr: f64,
    #[serde(rename = "TNR")]
    pub tnr: f64,
    #[serde(rename = "FPR")]
    pub fpr: f64,
    #[serde(rename = "A")]
    pub accuracy: f64,
    #[serde(rename = "P")]
    pub precision: f64,
    #[serde(rename = "R")]
    pub recall: f64,
    #[serde(rename = "F1")]
    pub f_measure: f64,
}

impl From<&MetricsReport> for Rates {
    fn from(m: &MetricsReport) -> Self {
        Rates {
            tpr: m.tpr,
            fnr: m.fnr,
            tnr: m.tnr,
            fpr: m.fpr,
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f_measure: m.f_measure,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Counts {
    #[serde(rename = "TP")]
    pub tp: usize,
    #[serde(rename = "TN")]
    pub tn: usize,
    #[serde(rename = "FP")]
    pub fp: usize,
    #[serde(rename = "FN")]
    pub fn_: usize,
}

impl From<&ConfusionCounts> for Counts {
    fn from(c: &ConfusionCounts) -> Self {
        Counts {
            tp: c.tp,
            tn: c.tn,
            fp: c.fp,
            fn_: c.fn_,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Excluded {
    pub app_id: String,
    pub reason: String,
}

impl From<&GraphFailure> for Excluded {
    fn from(f: &GraphFailure) -> Self {
        Excluded {
            app_id: f.app_id.clone(),
            reason: f.error.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EvalRow {
    pub threshold: f64,
    pub samples: usize,
    /// Mean of per-fold rates.
    pub metrics: Rates,
    pub counts: Counts,
    /// Rates over the summed fold counts.
    pub micro_metrics: Rates,
    pub per_fold: Vec<Counts>,
    pub excluded: Vec<Excluded>,
}

impl EvalRow {
    pub fn new(threshold: f64, report: &CrossValReport, excluded: &[GraphFailure]) -> Self {
        EvalRow {
            threshold,
            samples: report.micro.total(),
            metrics: (&report.metrics).into(),
            counts: (&report.micro).into(),
            micro_metrics: (&report.micro_metrics()).into(),
            per_fold: report.per_fold.iter().map(Counts::from).collect(),
            excluded: excluded.iter().map(Excluded::from).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub k: usize,
    pub folds: usize,
    pub seed: u64,
    pub algorithm: &'static str,
    pub coupling_denominator: &'static str,
    pub result: EvalRow,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<EvalRow>>,
}
