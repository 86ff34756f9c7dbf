//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use homgraph_core::{CallGraph, FunctionNode, NodeId, SensitiveApiCatalog};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn graph_from(n: u64, edges: &[(u64, u64)]) -> CallGraph {
    CallGraph::new(
        "oracle",
        None,
        (0..n)
            .map(|i| FunctionNode::new(i, format!("com.example.F{i}.run"), false))
            .collect(),
        edges.iter().map(|&(a, b)| (a.into(), b.into())).collect(),
    )
    .unwrap()
}

/// Digraph on `n` nodes with each ordered pair present with probability `p`.
pub fn random_digraph(n: u64, p: f64, seed: u64) -> CallGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    graph_from(n, &edges)
}

/// Classifies one triple by its mutual/asymmetric/null dyad counts and the
/// orientation of its asymmetric edges.
pub fn classify_triple(has: &dyn Fn(u64, u64) -> bool, t: [u64; 3]) -> &'static str {
    let pairs = [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])];
    let mut mutual = Vec::new();
    let mut asym = Vec::new(); // (from, to)
    for &(x, y) in &pairs {
        match (has(x, y), has(y, x)) {
            (true, true) => mutual.push((x, y)),
            (true, false) => asym.push((x, y)),
            (false, true) => asym.push((y, x)),
            (false, false) => {}
        }
    }
    let third = |x: u64, y: u64| t.into_iter().find(|&z| z != x && z != y).unwrap();
    match (mutual.len(), asym.len()) {
        (0, 0) => "003",
        (0, 1) => "012",
        (1, 0) => "102",
        (0, 2) => {
            let (a, b) = (asym[0], asym[1]);
            if a.0 == b.0 {
                "021D"
            } else if a.1 == b.1 {
                "021U"
            } else {
                "021C"
            }
        }
        (1, 1) => {
            let (x, y) = mutual[0];
            let (from, to) = asym[0];
            let z = third(x, y);
            if to == z {
                "111U"
            } else {
                debug_assert_eq!(from, z);
                "111D"
            }
        }
        (0, 3) => {
            let transitive = t
                .iter()
                .any(|&v| asym.iter().filter(|&&(f, _)| f == v).count() == 2);
            if transitive {
                "030T"
            } else {
                "030C"
            }
        }
        (2, 0) => "201",
        (1, 2) => {
            let (x, y) = mutual[0];
            let z = third(x, y);
            let sends = asym.iter().filter(|&&(f, _)| f == z).count();
            match sends {
                2 => "120D",
                0 => "120U",
                _ => "120C",
            }
        }
        (2, 1) => "210",
        (3, 0) => "300",
        _ => unreachable!(),
    }
}

pub struct BruteCensus {
    pub total: BTreeMap<&'static str, u64>,
    /// (catalog index, type) -> triads containing a node matching that entry.
    pub sensitive: BTreeMap<(usize, &'static str), u64>,
}

/// Enumerates every unordered triple.
pub fn brute_census(graph: &CallGraph, catalog: &SensitiveApiCatalog) -> BruteCensus {
    let ids: Vec<u64> = graph.node_ids().map(|id| id.0).collect();
    let edges: HashSet<(u64, u64)> = graph.edges().iter().map(|&(a, b)| (a.0, b.0)).collect();
    let has = |a: u64, b: u64| edges.contains(&(a, b));
    let apis: BTreeMap<u64, Vec<usize>> = graph
        .nodes()
        .iter()
        .map(|n| {
            let hits = catalog
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, e)| !n.name.trim().is_empty() && n.name.contains(e.as_str()))
                .map(|(i, _)| i)
                .collect();
            (n.id.0, hits)
        })
        .collect();
    let mut total = BTreeMap::new();
    let mut sensitive = BTreeMap::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            for k in j + 1..ids.len() {
                let t = [ids[i], ids[j], ids[k]];
                let code = classify_triple(&has, t);
                *total.entry(code).or_insert(0) += 1;
                let mut hit: BTreeSet<usize> = BTreeSet::new();
                for v in t {
                    hit.extend(apis[&v].iter().copied());
                }
                for api in hit {
                    *sensitive.entry((api, code)).or_insert(0) += 1;
                }
            }
        }
    }
    BruteCensus { total, sensitive }
}

/// Coupling by scanning every directed edge and deduplicating pairs.
pub fn coupling_oracle(
    graph: &CallGraph,
    a: &BTreeSet<NodeId>,
    b: &BTreeSet<NodeId>,
    internal_denominator: bool,
) -> (usize, usize, usize, f64) {
    let mut pairs = BTreeSet::new();
    for &(x, y) in graph.edges() {
        pairs.insert((x.min(y), x.max(y)));
    }
    let (mut ea, mut eb, mut s) = (0usize, 0usize, 0usize);
    for (x, y) in pairs {
        let (xa, ya, xb, yb) = (a.contains(&x), a.contains(&y), b.contains(&x), b.contains(&y));
        if xa && ya {
            ea += 1;
        } else if xb && yb {
            eb += 1;
        } else if (xa && yb) || (xb && ya) {
            s += 1;
        }
    }
    let n = (a.len() + b.len()) as f64;
    let p = a.len() as f64 / n;
    let tn = if internal_denominator { ea + eb } else { ea + eb + s };
    let c = if s == 0 {
        0.0
    } else if tn == 0 {
        f64::INFINITY
    } else {
        (s as f64 / tn as f64) / (2.0 * p * (1.0 - p))
    };
    (ea, eb, s, c)
}

/// Newman modularity from the pairwise definition
/// `Q = 1/2m · Σ_ij (A_ij − k_i k_j / 2m) δ(c_i, c_j)`.
pub fn modularity_oracle(graph: &CallGraph, community: &BTreeMap<NodeId, usize>) -> f64 {
    let ids: Vec<NodeId> = graph.node_ids().collect();
    let mut adj: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for &(x, y) in graph.edges() {
        adj.insert((x, y));
        adj.insert((y, x));
    }
    let degree: BTreeMap<NodeId, f64> = ids
        .iter()
        .map(|&i| (i, adj.iter().filter(|(x, _)| *x == i).count() as f64))
        .collect();
    let two_m = adj.len() as f64;
    let mut q = 0.0;
    for &i in &ids {
        for &j in &ids {
            if community[&i] == community[&j] {
                let a = if adj.contains(&(i, j)) { 1.0 } else { 0.0 };
                q += a - degree[&i] * degree[&j] / two_m;
            }
        }
    }
    q / two_m
}

pub fn jaccard(a: &BTreeSet<NodeId>, b: &BTreeSet<NodeId>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}
