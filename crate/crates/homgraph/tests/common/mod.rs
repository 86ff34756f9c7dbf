//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use homgraph_core::{CallGraph, FunctionNode, NodeId, SensitiveApiCatalog};

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
    let mut state = seed;
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && unit(&mut state) < p {
                edges.push((a, b));
            }
        }
    }
    graph_from(n, &edges)
}

/// splitmix64 mapped to [0, 1).
fn unit(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
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

pub fn jaccard(a: &BTreeSet<NodeId>, b: &BTreeSet<NodeId>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}
