//! Directed triad census with per-API sensitive counts.
//!
//! Every unordered node triple falls into one of the 16 canonical directed
//! triad types. The census enumerates only triples with at least two linked
//! dyads, walking edge neighbourhoods (Batagelj–Mrvar), and derives the
//! one-dyad and empty types by counting.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::catalog::SensitiveApiCatalog;
use crate::graph::CallGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum TriadType {
    T003 = 0,
    T012,
    T102,
    T021D,
    T021U,
    T021C,
    T111D,
    T111U,
    T030T,
    T030C,
    T201,
    T120D,
    T120U,
    T120C,
    T210,
    T300,
}

impl TriadType {
    pub const ALL: [TriadType; 16] = [
        TriadType::T003,
        TriadType::T012,
        TriadType::T102,
        TriadType::T021D,
        TriadType::T021U,
        TriadType::T021C,
        TriadType::T111D,
        TriadType::T111U,
        TriadType::T030T,
        TriadType::T030C,
        TriadType::T201,
        TriadType::T120D,
        TriadType::T120U,
        TriadType::T120C,
        TriadType::T210,
        TriadType::T300,
    ];

    pub fn code(self) -> &'static str {
        match self {
            TriadType::T003 => "003",
            TriadType::T012 => "012",
            TriadType::T102 => "102",
            TriadType::T021D => "021D",
            TriadType::T021U => "021U",
            TriadType::T021C => "021C",
            TriadType::T111D => "111D",
            TriadType::T111U => "111U",
            TriadType::T030T => "030T",
            TriadType::T030C => "030C",
            TriadType::T201 => "201",
            TriadType::T120D => "120D",
            TriadType::T120U => "120U",
            TriadType::T120C => "120C",
            TriadType::T210 => "210",
            TriadType::T300 => "300",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Position among [`SELECTED_TRIADS`], if selected.
    pub fn selected_index(self) -> Option<usize> {
        SELECTED_TRIADS.iter().position(|&t| t == self)
    }
}

impl fmt::Display for TriadType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// The six triad types that feed the ratio features, in feature order.
pub const SELECTED_TRIADS: [TriadType; 6] = [
    TriadType::T021D,
    TriadType::T021U,
    TriadType::T021C,
    TriadType::T111U,
    TriadType::T030T,
    TriadType::T120U,
];

// Type index for each 6-bit code built by `tricode`.
const TRICODE_TYPE: [u8; 64] = [
    0, 1, 1, 2, 1, 3, 5, 7, 1, 5, 4, 6, 2, 7, 6, 10, 1, 5, 3, 7, 4, 8, 8, 12, 5, 9, 8, 13, 6, 13,
    11, 14, 1, 4, 5, 6, 5, 8, 9, 13, 3, 8, 8, 11, 7, 12, 13, 14, 2, 6, 7, 10, 6, 11, 13, 14, 7, 13,
    12, 14, 10, 14, 14, 15,
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriadCensus {
    total: [u64; 16],
    /// Per catalog entry, counts for the selected types in [`SELECTED_TRIADS`] order.
    sensitive: Vec<[u64; 6]>,
}

impl TriadCensus {
    pub fn total(&self, t: TriadType) -> u64 {
        self.total[t.index()]
    }

    pub fn totals(&self) -> &[u64; 16] {
        &self.total
    }

    /// Triads of type `t` containing a node that matches catalog entry `api`.
    /// Zero for types outside [`SELECTED_TRIADS`].
    pub fn sensitive(&self, api: usize, t: TriadType) -> u64 {
        match t.selected_index() {
            Some(s) => self.sensitive[api][s],
            None => 0,
        }
    }

    pub fn sensitive_rows(&self) -> &[[u64; 6]] {
        &self.sensitive
    }

    pub fn catalog_len(&self) -> usize {
        self.sensitive.len()
    }

    /// Triples with no edge at all (type 003).
    pub fn edgeless(&self) -> u64 {
        self.total[TriadType::T003.index()]
    }
}

pub(crate) fn choose3(n: usize) -> u64 {
    let n = n as u128;
    if n < 3 {
        return 0;
    }
    (n * (n - 1) * (n - 2) / 6) as u64
}

struct Digraph {
    out: Vec<Vec<usize>>,
}

impl Digraph {
    fn has_edge(&self, a: usize, b: usize) -> bool {
        self.out[a].binary_search(&b).is_ok()
    }

    fn tricode(&self, v: usize, u: usize, w: usize) -> usize {
        let mut code = 0;
        for (bit, (a, b)) in [(v, u), (u, v), (v, w), (w, v), (u, w), (w, u)]
            .into_iter()
            .enumerate()
        {
            if self.has_edge(a, b) {
                code |= 1 << bit;
            }
        }
        code
    }
}

/// Full 16-type census of `graph`, with sensitive counts for the selected
/// types keyed by the catalog entries each member node's name matches.
///
/// A triad touching several matched entries counts once for each of them; an
/// entry matched by more than one member still counts the triad once.
pub fn triad_census(graph: &CallGraph, catalog: &SensitiveApiCatalog) -> TriadCensus {
    let n = graph.node_count();
    let mut out = vec![Vec::new(); n];
    for (a, b) in graph.indexed_edges() {
        out[a].push(b);
    }
    for list in &mut out {
        list.sort_unstable();
    }
    let digraph = Digraph { out };
    let adj = graph.undirected_adjacency();
    let matches: Vec<Vec<usize>> = graph
        .nodes()
        .iter()
        .map(|node| catalog.matches(&node.name))
        .collect();

    let mut total = [0u64; 16];
    let mut sensitive = vec![[0u64; 6]; catalog.len()];
    let mut stamp = vec![usize::MAX; n];
    let mut apis: Vec<usize> = Vec::new();

    for v in 0..n {
        for &u in adj.neighbors(v) {
            if u <= v {
                continue;
            }
            // Stamp the union of both neighbourhoods with a unique key per (v, u).
            let key = v * n + u;
            stamp[v] = key;
            stamp[u] = key;
            let mut union = 0usize;
            for &w in adj.neighbors(u).iter().chain(adj.neighbors(v)) {
                if stamp[w] == key {
                    continue;
                }
                stamp[w] = key;
                union += 1;
                let counted_here = u < w
                    || (v < w && w < u && adj.neighbors(v).binary_search(&w).is_err());
                if !counted_here {
                    continue;
                }
                let t = TRICODE_TYPE[digraph.tricode(v, u, w)] as usize;
                total[t] += 1;
                if let Some(sel) = TriadType::ALL[t].selected_index() {
                    apis.clear();
                    for node in [v, u, w] {
                        apis.extend_from_slice(&matches[node]);
                    }
                    apis.sort_unstable();
                    apis.dedup();
                    for &api in &apis {
                        sensitive[api][sel] += 1;
                    }
                }
            }
            let dyadic = if digraph.has_edge(v, u) && digraph.has_edge(u, v) {
                TriadType::T102
            } else {
                TriadType::T012
            };
            total[dyadic.index()] += (n - union - 2) as u64;
        }
    }
    let linked: u64 = total[1..].iter().sum();
    total[TriadType::T003.index()] = choose3(n) - linked;
    TriadCensus { total, sensitive }
}
