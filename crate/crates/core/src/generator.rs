//! Synthetic call graphs with a planted sensitive community.
//!
//! Every graph has a background of `community_count` densely wired
//! communities with no sensitive API calls, plus one planted community of
//! `planted_sensitive_community_size` nodes: `sensitive_api_count` sensitive
//! API nodes and a clique of user functions that call every one of them.
//! Only the user functions have edges leaving the planted community, so the
//! planted community is exactly the sensitive nodes plus their direct callers.
//!
//! The number of cross edges is solved from the coupling formula so that the
//! planted community's coupling with the background lands in the band for
//! its label: covert graphs in `covert_band`, benign graphs above
//! `benign_floor`. Cross edges are dealt round-robin over the background
//! communities so the planted community does not lean towards any of them.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::catalog::SensitiveApiCatalog;
use crate::graph::{CallGraph, FunctionNode, Label, NodeId};
use crate::homophily::{CouplingDenominator, CouplingReport};
use crate::rng::{seeded_stream, PipelineRng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub node_count: usize,
    pub community_count: usize,
    pub intra_edge_prob: f64,
    pub inter_edge_prob: f64,
    pub planted_sensitive_community_size: usize,
    /// Centre of the coupling drawn for covert graphs.
    pub planted_coupling_target: f64,
    /// Centre of the coupling drawn for benign graphs.
    pub benign_coupling_target: f64,
    /// Each graph draws its coupling uniformly within `target ± jitter`.
    pub coupling_jitter: f64,
    /// Covert couplings must fall in `(low, high]`.
    pub covert_band: (f64, f64),
    /// Benign couplings must exceed this.
    pub benign_floor: f64,
    pub sensitive_api_count: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            node_count: 3000,
            community_count: 120,
            intra_edge_prob: 0.37,
            inter_edge_prob: 0.0005,
            planted_sensitive_community_size: 30,
            planted_coupling_target: 2.0,
            benign_coupling_target: 6.0,
            coupling_jitter: 0.5,
            covert_band: (1.0, 3.0),
            benign_floor: 3.0,
            sensitive_api_count: 3,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self, catalog: &SensitiveApiCatalog) -> Result<()> {
        let infeasible = |msg: String| Err(Error::InfeasibleSpec(msg));
        let np = self.planted_sensitive_community_size;
        if np < 3 {
            return infeasible(format!("planted community size {np} is below 3"));
        }
        if np >= self.node_count {
            return infeasible(format!(
                "planted community size {np} is not smaller than node count {}",
                self.node_count
            ));
        }
        let background = self.node_count - np;
        if self.community_count == 0 || self.community_count > background {
            return infeasible(format!(
                "community count {} must be in 1..={background}",
                self.community_count
            ));
        }
        for (name, p) in [
            ("intra_edge_prob", self.intra_edge_prob),
            ("inter_edge_prob", self.inter_edge_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return infeasible(format!("{name} = {p} is not a probability"));
            }
        }
        if self.sensitive_api_count == 0 || self.sensitive_api_count >= np - 1 {
            return infeasible(format!(
                "sensitive API count {} must leave at least two callers in a community of {np}",
                self.sensitive_api_count
            ));
        }
        if self.sensitive_api_count > catalog.len() {
            return infeasible(format!(
                "sensitive API count {} exceeds catalog size {}",
                self.sensitive_api_count,
                catalog.len()
            ));
        }
        let (lo, hi) = self.covert_band;
        let j = self.coupling_jitter;
        if !(j >= 0.0) || !(lo < hi) {
            return infeasible("coupling band or jitter is malformed".into());
        }
        let t = self.planted_coupling_target;
        if !(t - j > lo && t + j <= hi) {
            return infeasible(format!(
                "covert coupling {t} ± {j} is not inside ({lo}, {hi}]"
            ));
        }
        let b = self.benign_coupling_target;
        if !(b - j > self.benign_floor) {
            return infeasible(format!(
                "benign coupling {b} ± {j} is not above {}",
                self.benign_floor
            ));
        }
        Ok(())
    }
}

/// What the generator planted in one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTruth {
    pub app_id: String,
    pub label: Label,
    /// Sensitive API nodes and the user functions calling them.
    pub planted_nodes: BTreeSet<NodeId>,
    /// Catalog indices of the planted sensitive APIs, ascending.
    pub sensitive_apis: Vec<usize>,
    /// Coupling of the planted community with the rest of the graph.
    pub coupling: f64,
}

/// Generates `benign_count` benign graphs followed by `covert_count` covert
/// ones. Graph `i` of each label draws from its own ChaCha8 stream, so the
/// corpus is a pure function of `spec.seed`.
pub fn generate_corpus(
    spec: &SyntheticSpec,
    catalog: &SensitiveApiCatalog,
    benign_count: usize,
    covert_count: usize,
) -> Result<Vec<(CallGraph, PlantedTruth)>> {
    if benign_count + covert_count == 0 {
        return Ok(Vec::new());
    }
    spec.validate(catalog)?;
    let mut out = Vec::with_capacity(benign_count + covert_count);
    for i in 0..benign_count {
        out.push(generate_graph(spec, catalog, Label::Benign, i)?);
    }
    for i in 0..covert_count {
        out.push(generate_graph(spec, catalog, Label::Malware, i)?);
    }
    Ok(out)
}

fn stream_id(label: Label, index: usize) -> u64 {
    let tag = match label {
        Label::Benign => 0u64,
        Label::Malware => 1u64,
    };
    (tag << 40) | index as u64
}

pub fn app_id_for(label: Label, index: usize) -> String {
    match label {
        Label::Benign => format!("benign-{index:05}"),
        Label::Malware => format!("covert-{index:05}"),
    }
}

struct EdgeSet {
    edges: Vec<(usize, usize)>,
    pairs: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    fn new() -> Self {
        EdgeSet {
            edges: Vec::new(),
            pairs: BTreeSet::new(),
        }
    }

    fn linked(&self, a: usize, b: usize) -> bool {
        self.pairs.contains(&(a.min(b), a.max(b)))
    }

    /// Adds `from -> to` unless the pair is already linked either way.
    fn add(&mut self, from: usize, to: usize) -> bool {
        if from == to || !self.pairs.insert((from.min(to), from.max(to))) {
            return false;
        }
        self.edges.push((from, to));
        true
    }

    fn add_random_direction(&mut self, a: usize, b: usize, rng: &mut PipelineRng) -> bool {
        if rng.gen_bool(0.5) {
            self.add(a, b)
        } else {
            self.add(b, a)
        }
    }
}

/// Generates a single graph; `index` selects the random stream.
pub fn generate_graph(
    spec: &SyntheticSpec,
    catalog: &SensitiveApiCatalog,
    label: Label,
    index: usize,
) -> Result<(CallGraph, PlantedTruth)> {
    spec.validate(catalog)?;
    let mut rng = seeded_stream(spec.seed, stream_id(label, index));
    let n = spec.node_count;
    let np = spec.planted_sensitive_community_size;
    let ns = spec.sensitive_api_count;
    let nb = n - np;
    let k = spec.community_count;

    // Background communities are contiguous blocks of logical indices 0..nb.
    let block_start = |c: usize| c * nb / k;
    let mut edges = EdgeSet::new();
    for c in 0..k {
        let (lo, hi) = (block_start(c), block_start(c + 1));
        // A cycle keeps every member attached to its own community.
        if hi - lo >= 2 {
            for a in lo..hi {
                let b = if a + 1 == hi { lo } else { a + 1 };
                edges.add_random_direction(a, b, &mut rng);
            }
        }
        for a in lo..hi {
            for b in a + 1..hi {
                if !edges.linked(a, b) && rng.gen_bool(spec.intra_edge_prob) {
                    edges.add_random_direction(a, b, &mut rng);
                }
            }
        }
    }
    let mut membership = vec![0usize; nb];
    for c in 0..k {
        membership[block_start(c)..block_start(c + 1)].fill(c);
    }
    let community_of = |i: usize| membership[i];
    let intra_pairs: usize = (0..k)
        .map(|c| {
            let s = block_start(c + 1) - block_start(c);
            s * s.saturating_sub(1) / 2
        })
        .sum();
    let inter_pairs = nb * (nb - 1) / 2 - intra_pairs;
    let inter_target = round(spec.inter_edge_prob * inter_pairs as f64) as usize;
    let mut placed = 0;
    while placed < inter_target {
        let a = rng.gen_range(0..nb);
        let b = rng.gen_range(0..nb);
        if community_of(a) != community_of(b) && edges.add_random_direction(a, b, &mut rng) {
            placed += 1;
        }
    }
    let background_edges = edges.edges.len();

    // Planted community: sensitive APIs at nb..nb+ns, callers after them.
    let apis = {
        let mut all: Vec<usize> = (0..catalog.len()).collect();
        all.shuffle(&mut rng);
        let mut chosen = all[..ns].to_vec();
        chosen.sort_unstable();
        chosen
    };
    let callers: Vec<usize> = (nb + ns..n).collect();
    for &m in &callers {
        for s in nb..nb + ns {
            edges.add(m, s);
        }
    }
    for (i, &a) in callers.iter().enumerate() {
        for &b in &callers[i + 1..] {
            edges.add_random_direction(a, b, &mut rng);
        }
    }
    let planted_edges = edges.edges.len() - background_edges;

    let centre = match label {
        Label::Malware => spec.planted_coupling_target,
        Label::Benign => spec.benign_coupling_target,
    };
    let target = centre + spec.coupling_jitter * (2.0 * rng.gen::<f64>() - 1.0);
    let cross = cross_edge_count(spec, label, target, background_edges, planted_edges)?;
    if cross > callers.len() * nb {
        return Err(Error::InfeasibleSpec(format!(
            "{cross} cross edges do not fit between {} callers and {nb} background nodes",
            callers.len()
        )));
    }

    // Deal cross edges round-robin over communities and callers.
    let mut added = 0;
    let mut r = 0usize;
    let mut stalled = 0usize;
    while added < cross {
        let c = r % k;
        let m = callers[(r / k + r) % callers.len()];
        r += 1;
        let (lo, hi) = (block_start(c), block_start(c + 1));
        let free: Vec<usize> = (lo..hi).filter(|&b| !edges.linked(m, b)).collect();
        if free.is_empty() {
            stalled += 1;
            if stalled > k * callers.len() {
                return Err(Error::InfeasibleSpec(
                    "background too small for the requested coupling".into(),
                ));
            }
            continue;
        }
        stalled = 0;
        let b = free[rng.gen_range(0..free.len())];
        edges.add_random_direction(m, b, &mut rng);
        added += 1;
    }

    // Opaque ids: a random permutation of 0..n.
    let mut ids: Vec<u64> = (0..n as u64).collect();
    ids.shuffle(&mut rng);
    let app_id = app_id_for(label, index);
    let mut nodes = Vec::with_capacity(n);
    for logical in 0..n {
        let name = if logical < nb {
            format!("com.synth.c{}.Unit{logical}.run", community_of(logical))
        } else if logical < nb + ns {
            format!("{}()V", catalog.entries()[apis[logical - nb]])
        } else {
            format!("com.synth.core.Worker{}.invoke", logical - nb - ns)
        };
        let sensitive = catalog.is_sensitive(&name);
        nodes.push(FunctionNode::new(ids[logical], name, sensitive));
    }
    let graph_edges = edges
        .edges
        .iter()
        .map(|&(a, b)| (NodeId(ids[a]), NodeId(ids[b])))
        .collect();
    let graph = CallGraph::new(app_id.clone(), Some(label), nodes, graph_edges)?;

    let coupling = CouplingReport::from_counts(
        np,
        nb,
        planted_edges,
        background_edges,
        cross,
        CouplingDenominator::Total,
    )
    .c;
    let truth = PlantedTruth {
        app_id,
        label,
        planted_nodes: (nb..n).map(|i| NodeId(ids[i])).collect(),
        sensitive_apis: apis,
        coupling,
    };
    Ok((graph, truth))
}

fn round(x: f64) -> f64 {
    // f64::round lives in std.
    let t = x as i64 as f64;
    if x - t >= 0.5 {
        t + 1.0
    } else {
        t
    }
}

/// Smallest adjustment of the solved cross-edge count that keeps the
/// coupling inside the label's band.
fn cross_edge_count(
    spec: &SyntheticSpec,
    label: Label,
    target: f64,
    background_edges: usize,
    planted_edges: usize,
) -> Result<usize> {
    let np = spec.planted_sensitive_community_size;
    let nb = spec.node_count - np;
    let at = |s: usize| {
        CouplingReport::from_counts(
            np,
            nb,
            planted_edges,
            background_edges,
            s,
            CouplingDenominator::Total,
        )
        .c
    };
    let two_pq = CouplingReport::from_counts(np, nb, 0, 0, 0, CouplingDenominator::Total)
        .expected_cross_fraction();
    let share = target * two_pq;
    if !(share < 1.0) {
        return Err(Error::InfeasibleSpec(format!(
            "coupling {target} needs more than all edges to cross"
        )));
    }
    let internal = (background_edges + planted_edges) as f64;
    let mut s = round(share * internal / (1.0 - share)) as usize;
    let in_band = |c: f64| match label {
        Label::Malware => c > spec.covert_band.0 && c <= spec.covert_band.1,
        Label::Benign => c > spec.benign_floor,
    };
    for _ in 0..1000 {
        let c = at(s);
        if in_band(c) {
            return Ok(s);
        }
        let too_low = match label {
            Label::Malware => c <= spec.covert_band.0,
            Label::Benign => true,
        };
        s = if too_low { s + 1 } else { s.saturating_sub(1) };
    }
    Err(Error::InfeasibleSpec(format!(
        "could not place coupling near {target}"
    )))
}
