//! Homophily analysis: coupling between node groups, suspicious-subgraph
//! assembly and covertness statistics.
//!
//! The coupling of two disjoint parts `a` and `b` compares the observed share
//! of cross edges with the share expected if edges ignored the split:
//!
//! ```text
//! c(a, b) = (s / tn) / (2 · p · q),   p = n_a / (n_a + n_b),  q = 1 − p
//! ```
//!
//! where `s` counts edges with one endpoint in each part and `tn` is either
//! all edges of the two-part subgraph (`e_a + e_b + s`, the default) or only
//! the internal ones (`e_a + e_b`). Edges are counted once per unordered
//! node pair, and edges leaving `a ∪ b` are ignored.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::community::CommunityPartition;
use crate::graph::{CallGraph, NodeId};
use crate::{Error, Result};

/// Proportion below which a malicious part counts as covert.
pub const COVERT_PROPORTION_LIMIT: f64 = 0.02;
/// Inclusive coupling band observed for covert malware.
pub const COVERT_COUPLING_BAND: (f64, f64) = (1.0, 5.0);
pub const DEFAULT_THRESHOLD: f64 = 3.0;
pub const DEFAULT_HOPS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingDenominator {
    /// `e_a + e_b + s`
    #[default]
    Total,
    /// `e_a + e_b`
    Internal,
}

impl CouplingDenominator {
    pub fn as_str(self) -> &'static str {
        match self {
            CouplingDenominator::Total => "total",
            CouplingDenominator::Internal => "internal",
        }
    }
}

impl fmt::Display for CouplingDenominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CouplingDenominator {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "total" => Ok(CouplingDenominator::Total),
            "internal" => Ok(CouplingDenominator::Internal),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingReport {
    pub n_a: usize,
    pub n_b: usize,
    pub e_a: usize,
    pub e_b: usize,
    pub s: usize,
    pub c: f64,
}

impl CouplingReport {
    /// Evaluates the coupling formula on raw counts.
    ///
    /// `c` is 0 when there are no cross edges, no edges at all, or an empty
    /// part. With the internal denominator and cross edges only, `c` is
    /// infinite.
    pub fn from_counts(
        n_a: usize,
        n_b: usize,
        e_a: usize,
        e_b: usize,
        s: usize,
        denominator: CouplingDenominator,
    ) -> Self {
        let mut report = CouplingReport {
            n_a,
            n_b,
            e_a,
            e_b,
            s,
            c: 0.0,
        };
        let tn = report.edge_denominator(denominator);
        if s == 0 || n_a == 0 || n_b == 0 || e_a + e_b + s == 0 {
            return report;
        }
        report.c = if tn == 0 {
            f64::INFINITY
        } else {
            (s as f64 / tn as f64) / report.expected_cross_fraction()
        };
        report
    }

    pub fn edge_denominator(&self, denominator: CouplingDenominator) -> usize {
        match denominator {
            CouplingDenominator::Total => self.e_a + self.e_b + self.s,
            CouplingDenominator::Internal => self.e_a + self.e_b,
        }
    }

    /// `2 · p · q`, the chance that a random edge joins the two parts.
    pub fn expected_cross_fraction(&self) -> f64 {
        let total = (self.n_a + self.n_b) as f64;
        if total == 0.0 {
            return 0.0;
        }
        2.0 * (self.n_a as f64 / total) * (self.n_b as f64 / total)
    }
}

/// Coupling with the default (total-edge) denominator.
pub fn coupling(
    graph: &CallGraph,
    part_a: &BTreeSet<NodeId>,
    part_b: &BTreeSet<NodeId>,
) -> Result<CouplingReport> {
    coupling_with(graph, part_a, part_b, CouplingDenominator::Total)
}

pub fn coupling_with(
    graph: &CallGraph,
    part_a: &BTreeSet<NodeId>,
    part_b: &BTreeSet<NodeId>,
    denominator: CouplingDenominator,
) -> Result<CouplingReport> {
    if part_a.is_empty() || part_b.is_empty() {
        return Err(Error::EmptyPart);
    }
    let side = side_map(graph, part_a, part_b)?;
    Ok(count_coupling(
        &graph.undirected_edges(),
        &side,
        part_a.len(),
        part_b.len(),
        denominator,
    ))
}

const OUTSIDE: u8 = 0;
const SIDE_A: u8 = 1;
const SIDE_B: u8 = 2;

fn side_map(
    graph: &CallGraph,
    part_a: &BTreeSet<NodeId>,
    part_b: &BTreeSet<NodeId>,
) -> Result<Vec<u8>> {
    let mut side = vec![OUTSIDE; graph.node_count()];
    for (set, tag) in [(part_a, SIDE_A), (part_b, SIDE_B)] {
        for &id in set {
            let i = graph.index_of(id).ok_or(Error::UnknownNode(id))?;
            if side[i] != OUTSIDE {
                return Err(Error::OverlappingParts(id));
            }
            side[i] = tag;
        }
    }
    Ok(side)
}

fn count_coupling(
    edges: &[(usize, usize)],
    side: &[u8],
    n_a: usize,
    n_b: usize,
    denominator: CouplingDenominator,
) -> CouplingReport {
    let (mut e_a, mut e_b, mut s) = (0, 0, 0);
    for &(u, v) in edges {
        match (side[u], side[v]) {
            (SIDE_A, SIDE_A) => e_a += 1,
            (SIDE_B, SIDE_B) => e_b += 1,
            (SIDE_A, SIDE_B) | (SIDE_B, SIDE_A) => s += 1,
            _ => {}
        }
    }
    CouplingReport::from_counts(n_a, n_b, e_a, e_b, s, denominator)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Coupling above the threshold: treated as benign code.
    FilteredBenign,
    Suspicious,
}

impl Verdict {
    /// `c > threshold` filters; `c == threshold` stays suspicious.
    pub fn from_coupling(c: f64, threshold: f64) -> Self {
        if c > threshold {
            Verdict::FilteredBenign
        } else {
            Verdict::Suspicious
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::FilteredBenign => "filtered_benign",
            Verdict::Suspicious => "suspicious",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitiveCommunity {
    /// Id in the source [`CommunityPartition`].
    pub community_id: usize,
    pub nodes: BTreeSet<NodeId>,
    /// Coupling of this community (part a) with the benign community (part b).
    pub coupling: CouplingReport,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOutcome {
    /// Union of all communities without sensitive nodes.
    pub benign_nodes: BTreeSet<NodeId>,
    pub sensitive_communities: Vec<SensitiveCommunity>,
    pub suspicious_subgraph: CallGraph,
    pub threshold: f64,
}

impl PartitionOutcome {
    pub fn suspicious_nodes(&self) -> BTreeSet<NodeId> {
        self.suspicious_subgraph.node_ids().collect()
    }
}

/// Splits the partition into the benign community and sensitive communities,
/// filters sensitive communities whose coupling with the benign community
/// exceeds `threshold`, and induces the suspicious subgraph on the rest.
///
/// Each sensitive community is compared against the benign community alone,
/// so edges into other sensitive communities do not count. Without a benign
/// community every sensitive community is suspicious and reports `c = 0`.
pub fn partition_suspicious(
    graph: &CallGraph,
    partition: &CommunityPartition,
    threshold: f64,
    denominator: CouplingDenominator,
) -> Result<PartitionOutcome> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidThreshold(threshold));
    }
    if partition.assignment().len() != graph.node_count()
        || !partition.iter().map(|(id, _)| id).eq(graph.node_ids())
    {
        return Err(Error::InvalidPartition(
            "partition does not cover the graph's nodes".into(),
        ));
    }

    let k = partition.community_count();
    let mut has_sensitive = vec![false; k];
    for (node, &c) in graph.nodes().iter().zip(partition.assignment()) {
        has_sensitive[c] |= node.sensitive;
    }

    let mut benign_nodes = BTreeSet::new();
    let mut side = vec![OUTSIDE; graph.node_count()];
    for (i, &c) in partition.assignment().iter().enumerate() {
        if !has_sensitive[c] {
            benign_nodes.insert(graph.nodes()[i].id);
            side[i] = SIDE_B;
        }
    }

    let edges = graph.undirected_edges();
    let mut sensitive_communities = Vec::new();
    let mut suspicious = BTreeSet::new();
    for (community_id, members) in partition.communities().into_iter().enumerate() {
        if !has_sensitive[community_id] {
            continue;
        }
        let report = if benign_nodes.is_empty() {
            let internal = graph
                .induced_subgraph(&members)
                .undirected_edges()
                .len();
            CouplingReport::from_counts(members.len(), 0, internal, 0, 0, denominator)
        } else {
            for (i, &c) in partition.assignment().iter().enumerate() {
                if c == community_id {
                    side[i] = SIDE_A;
                }
            }
            let report =
                count_coupling(&edges, &side, members.len(), benign_nodes.len(), denominator);
            for (i, &c) in partition.assignment().iter().enumerate() {
                if c == community_id {
                    side[i] = OUTSIDE;
                }
            }
            report
        };
        let verdict = if benign_nodes.is_empty() {
            Verdict::Suspicious
        } else {
            Verdict::from_coupling(report.c, threshold)
        };
        if verdict == Verdict::Suspicious {
            suspicious.extend(members.iter().copied());
        }
        sensitive_communities.push(SensitiveCommunity {
            community_id,
            nodes: members,
            coupling: report,
            verdict,
        });
    }

    Ok(PartitionOutcome {
        benign_nodes,
        sensitive_communities,
        suspicious_subgraph: graph.induced_subgraph(&suspicious),
        threshold,
    })
}

/// Sensitive nodes plus every node reaching one of them in at most `hops`
/// call steps (`hops = 1` adds the direct callers).
pub fn malicious_part(graph: &CallGraph, hops: usize) -> BTreeSet<NodeId> {
    let n = graph.node_count();
    let mut callers = vec![Vec::new(); n];
    for (a, b) in graph.indexed_edges() {
        callers[b].push(a);
    }
    let mut depth = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for (i, node) in graph.nodes().iter().enumerate() {
        if node.sensitive {
            depth[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        if depth[i] == hops {
            continue;
        }
        for &p in &callers[i] {
            if depth[p] == usize::MAX {
                depth[p] = depth[i] + 1;
                queue.push_back(p);
            }
        }
    }
    graph
        .nodes()
        .iter()
        .zip(&depth)
        .filter(|(_, &d)| d != usize::MAX)
        .map(|(n, _)| n.id)
        .collect()
}

/// Share of the graph taken by the malicious part, bucketed by whole
/// percentage points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProportionCategory {
    Below1,
    From1To2,
    From2To3,
    From3To4,
    From4To5,
    AtLeast5,
}

impl ProportionCategory {
    pub fn from_proportion(p: f64) -> Self {
        match p {
            p if p < 0.01 => ProportionCategory::Below1,
            p if p < 0.02 => ProportionCategory::From1To2,
            p if p < 0.03 => ProportionCategory::From2To3,
            p if p < 0.04 => ProportionCategory::From3To4,
            p if p < 0.05 => ProportionCategory::From4To5,
            _ => ProportionCategory::AtLeast5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProportionCategory::Below1 => "[0,1%)",
            ProportionCategory::From1To2 => "[1,2%)",
            ProportionCategory::From2To3 => "[2,3%)",
            ProportionCategory::From3To4 => "[3,4%)",
            ProportionCategory::From4To5 => "[4,5%)",
            ProportionCategory::AtLeast5 => ">=5%",
        }
    }
}

impl fmt::Display for ProportionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovertnessReport {
    pub malicious_nodes: BTreeSet<NodeId>,
    pub proportion: f64,
    /// Part a is the normal remainder, part b the malicious part.
    pub coupling_normal_malicious: CouplingReport,
    pub category: ProportionCategory,
    pub covert_candidate: bool,
}

/// Small malicious part that is still strongly tied to the normal code.
pub fn is_covert_candidate(proportion: f64, c: f64) -> bool {
    proportion < COVERT_PROPORTION_LIMIT
        && (COVERT_COUPLING_BAND.0..=COVERT_COUPLING_BAND.1).contains(&c)
}

pub fn covertness(
    graph: &CallGraph,
    hops: usize,
    denominator: CouplingDenominator,
) -> Result<CovertnessReport> {
    if !graph.nodes().iter().any(|n| n.sensitive) {
        return Err(Error::NoSensitiveNodes);
    }
    let malicious = malicious_part(graph, hops);
    if malicious.len() == graph.node_count() {
        return Err(Error::MaliciousPartCoversGraph);
    }
    let normal: BTreeSet<NodeId> = graph
        .node_ids()
        .filter(|id| !malicious.contains(id))
        .collect();
    let report = coupling_with(graph, &normal, &malicious, denominator)?;
    let proportion = malicious.len() as f64 / graph.node_count() as f64;
    Ok(CovertnessReport {
        proportion,
        category: ProportionCategory::from_proportion(proportion),
        covert_candidate: is_covert_candidate(proportion, report.c),
        coupling_normal_malicious: report,
        malicious_nodes: malicious,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::fixtures::graph;
    use crate::graph::FunctionNode;
    use alloc::format;

    fn ids(v: &[u64]) -> BTreeSet<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    fn flagged(n: u64, sensitive: &[u64], edges: &[(u64, u64)]) -> CallGraph {
        CallGraph::new(
            "t",
            None,
            (0..n)
                .map(|i| FunctionNode::new(i, format!("f{i}"), sensitive.contains(&i)))
                .collect(),
            edges.iter().map(|&(a, b)| (a.into(), b.into())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn classroom_counts_give_five_eighths() {
        let r = CouplingReport::from_counts(12, 6, 8, 5, 5, CouplingDenominator::Total);
        assert_eq!(r.edge_denominator(CouplingDenominator::Total), 18);
        assert!((r.expected_cross_fraction() - 8.0 / 18.0).abs() < 1e-12);
        assert!((r.c - 0.625).abs() < 1e-12);
    }

    #[test]
    fn internal_denominator_excludes_cross_edges() {
        let r = CouplingReport::from_counts(12, 6, 8, 5, 5, CouplingDenominator::Internal);
        assert!((r.c - (5.0 / 13.0) / (8.0 / 18.0)).abs() < 1e-12);
        let only_cross = CouplingReport::from_counts(1, 1, 0, 0, 1, CouplingDenominator::Internal);
        assert!(only_cross.c.is_infinite());
    }

    #[test]
    fn no_cross_edges_means_zero_coupling() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        let r = coupling(&g, &ids(&[0, 1]), &ids(&[2, 3])).unwrap();
        assert_eq!(r.s, 0);
        assert_eq!(r.c, 0.0);
    }

    #[test]
    fn outside_edges_are_ignored() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let r = coupling(&g, &ids(&[0, 1]), &ids(&[2])).unwrap();
        assert_eq!((r.e_a, r.e_b, r.s), (1, 0, 1));
    }

    #[test]
    fn reciprocal_calls_count_once() {
        let g = graph(2, &[(0, 1), (1, 0)]);
        let r = coupling(&g, &ids(&[0]), &ids(&[1])).unwrap();
        assert_eq!(r.s, 1);
        assert!((r.c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_parts_are_rejected() {
        let g = graph(3, &[(0, 1)]);
        assert_eq!(coupling(&g, &ids(&[]), &ids(&[1])), Err(Error::EmptyPart));
        assert_eq!(
            coupling(&g, &ids(&[0, 1]), &ids(&[1])),
            Err(Error::OverlappingParts(NodeId(1)))
        );
        assert_eq!(
            coupling(&g, &ids(&[0]), &ids(&[9])),
            Err(Error::UnknownNode(NodeId(9)))
        );
    }

    #[test]
    fn boundary_coupling_stays_suspicious() {
        assert_eq!(Verdict::from_coupling(3.0, 3.0), Verdict::Suspicious);
        assert_eq!(Verdict::from_coupling(3.0 + 1e-9, 3.0), Verdict::FilteredBenign);
    }

    #[test]
    fn no_sensitive_nodes_gives_empty_outcome() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        let p = CommunityPartition::from_labels(&g, &[0, 0, 1, 1]).unwrap();
        let out = partition_suspicious(&g, &p, 3.0, CouplingDenominator::Total).unwrap();
        assert!(out.sensitive_communities.is_empty());
        assert!(out.suspicious_subgraph.is_empty());
        assert_eq!(out.benign_nodes.len(), 4);
    }

    #[test]
    fn all_sensitive_means_all_suspicious() {
        let g = flagged(4, &[0, 2], &[(0, 1), (2, 3), (1, 2)]);
        let p = CommunityPartition::from_labels(&g, &[0, 0, 1, 1]).unwrap();
        let out = partition_suspicious(&g, &p, 3.0, CouplingDenominator::Total).unwrap();
        assert!(out.benign_nodes.is_empty());
        assert_eq!(out.sensitive_communities.len(), 2);
        for sc in &out.sensitive_communities {
            assert_eq!(sc.verdict, Verdict::Suspicious);
            assert_eq!(sc.coupling.c, 0.0);
        }
        assert_eq!(out.suspicious_subgraph.node_count(), 4);
    }

    #[test]
    fn non_positive_threshold_is_rejected() {
        let g = graph(2, &[(0, 1)]);
        let p = CommunityPartition::singletons(&g);
        assert!(matches!(
            partition_suspicious(&g, &p, 0.0, CouplingDenominator::Total),
            Err(Error::InvalidThreshold(_))
        ));
    }

    #[test]
    fn edges_between_sensitive_communities_are_excluded() {
        // community {0,1} sensitive, {2,3} sensitive, {4,5} benign
        let g = flagged(6, &[0, 2], &[(0, 1), (2, 3), (4, 5), (1, 2), (1, 4)]);
        let p = CommunityPartition::from_labels(&g, &[0, 0, 1, 1, 2, 2]).unwrap();
        let out = partition_suspicious(&g, &p, 3.0, CouplingDenominator::Total).unwrap();
        let first = &out.sensitive_communities[0].coupling;
        assert_eq!((first.e_a, first.e_b, first.s), (1, 1, 1));
        let second = &out.sensitive_communities[1].coupling;
        assert_eq!((second.e_a, second.e_b, second.s), (1, 1, 0));
    }

    #[test]
    fn malicious_part_follows_callers() {
        // a(0) -> b(1) -> s(2)
        let g = flagged(3, &[2], &[(0, 1), (1, 2)]);
        assert_eq!(malicious_part(&g, 1), ids(&[1, 2]));
        assert_eq!(malicious_part(&g, 2), ids(&[0, 1, 2]));
        assert_eq!(malicious_part(&g, 0), ids(&[2]));
    }

    #[test]
    fn star_of_callers_into_sensitive_node() {
        let n = 20;
        let mut edges: Vec<(u64, u64)> = (1..=5).map(|i| (i, 0)).collect();
        edges.extend((6..n - 1).map(|i| (i, i + 1)));
        let g = flagged(n, &[0], &edges);
        let report = covertness(&g, 1, CouplingDenominator::Total).unwrap();
        assert_eq!(report.malicious_nodes, ids(&[0, 1, 2, 3, 4, 5]));
        assert!((report.proportion - 6.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn covert_candidate_band() {
        assert!(!is_covert_candidate(0.03, 2.0));
        assert!(!is_covert_candidate(0.015, 0.4));
        assert!(is_covert_candidate(0.015, 1.0));
        assert!(is_covert_candidate(0.015, 5.0));
        assert!(!is_covert_candidate(0.015, 5.01));
    }

    #[test]
    fn category_buckets() {
        assert_eq!(ProportionCategory::from_proportion(0.0), ProportionCategory::Below1);
        assert_eq!(ProportionCategory::from_proportion(0.012), ProportionCategory::From1To2);
        assert_eq!(ProportionCategory::from_proportion(0.02), ProportionCategory::From2To3);
        assert_eq!(ProportionCategory::from_proportion(0.049), ProportionCategory::From4To5);
        assert_eq!(ProportionCategory::from_proportion(0.05), ProportionCategory::AtLeast5);
    }

    #[test]
    fn covertness_errors() {
        let g = graph(3, &[(0, 1)]);
        assert_eq!(
            covertness(&g, 1, CouplingDenominator::Total),
            Err(Error::NoSensitiveNodes)
        );
        let g = flagged(2, &[1], &[(0, 1)]);
        assert_eq!(
            covertness(&g, 1, CouplingDenominator::Total),
            Err(Error::MaliciousPartCoversGraph)
        );
    }
}
