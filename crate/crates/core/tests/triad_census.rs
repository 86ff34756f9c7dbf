mod common;

use common::{brute_census, graph_from, random_digraph};
use homgraph_core::features::{feature_names, featurize_subgraph};
use homgraph_core::triad::TriadType;
use homgraph_core::{triad_census, CallGraph, FunctionNode, SensitiveApiCatalog, SELECTED_TRIADS};
use proptest::prelude::*;

fn catalog() -> SensitiveApiCatalog {
    SensitiveApiCatalog::new(["api.Alpha.a", "api.Beta.b", "api.Gamma.c"]).unwrap()
}

fn with_names(g: &CallGraph, every: u64) -> CallGraph {
    let names = ["api.Alpha.a()V", "api.Beta.b", "api.Gamma.c()I"];
    let nodes = g
        .nodes()
        .iter()
        .map(|n| {
            let name = if n.id.0 % every == 0 {
                names[(n.id.0 / every) as usize % 3].to_string()
            } else {
                n.name.clone()
            };
            FunctionNode::new(n.id, name, false)
        })
        .collect();
    CallGraph::new("named", None, nodes, g.edges().to_vec()).unwrap()
}

fn assert_matches_oracle(g: &CallGraph, cat: &SensitiveApiCatalog) {
    let fast = triad_census(g, cat);
    let slow = brute_census(g, cat);
    for t in TriadType::ALL {
        assert_eq!(
            fast.total(t),
            slow.total.get(t.code()).copied().unwrap_or(0),
            "type {t} on {} nodes",
            g.node_count()
        );
    }
    for api in 0..cat.len() {
        for t in SELECTED_TRIADS {
            assert_eq!(
                fast.sensitive(api, t),
                slow.sensitive.get(&(api, t.code())).copied().unwrap_or(0),
                "api {api} type {t}"
            );
        }
    }
    let n = g.node_count() as u64;
    let all = if n < 3 { 0 } else { n * (n - 1) * (n - 2) / 6 };
    let linked: u64 = fast.totals()[1..].iter().sum();
    assert_eq!(linked + fast.edgeless(), all);
}

#[test]
fn census_matches_brute_force_on_seeded_digraphs() {
    let cat = catalog();
    for seed in 0..200u64 {
        let n = 1 + seed % 30;
        let p = [0.05, 0.1, 0.2, 0.4][(seed % 4) as usize];
        let g = with_names(&random_digraph(n, p, seed), 4);
        assert_matches_oracle(&g, &cat);
    }
}

proptest! {
    #[test]
    fn census_matches_brute_force(
        n in 1u64..16,
        raw in proptest::collection::vec((0u64..16, 0u64..16), 0..60),
        every in 1u64..5,
    ) {
        let edges: Vec<(u64, u64)> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let g = with_names(&graph_from(n, &edges), every);
        assert_matches_oracle(&g, &catalog());
    }
}

// Six nodes, sensitive APIs on nodes 4 and 5.
fn six_node_example() -> (CallGraph, SensitiveApiCatalog) {
    let cat = SensitiveApiCatalog::new(["api.Four.call", "api.Five.call"]).unwrap();
    let nodes = (0..6u64)
        .map(|i| {
            let name = match i {
                4 => "api.Four.call()V".to_string(),
                5 => "api.Five.call()V".to_string(),
                _ => format!("com.example.F{i}.run"),
            };
            FunctionNode::new(i, name, i >= 4)
        })
        .collect();
    let edges = [(0, 3), (0, 4), (1, 0), (1, 4), (3, 2), (3, 5)]
        .into_iter()
        .map(|(a, b): (u64, u64)| (a.into(), b.into()))
        .collect();
    (CallGraph::new("six", None, nodes, edges).unwrap(), cat)
}

#[test]
fn six_node_example_has_expected_totals() {
    let (g, cat) = six_node_example();
    let slow = brute_census(&g, &cat);
    let totals: Vec<u64> = SELECTED_TRIADS
        .iter()
        .map(|t| slow.total.get(t.code()).copied().unwrap_or(0))
        .collect();
    assert_eq!(totals, vec![2, 0, 3, 0, 1, 0]);
    assert_eq!(slow.sensitive.get(&(1, "021C")), Some(&1));

    let fast = triad_census(&g, &cat);
    let fast_totals: Vec<u64> = SELECTED_TRIADS.iter().map(|&t| fast.total(t)).collect();
    assert_eq!(fast_totals, totals);
}

#[test]
fn six_node_example_ratio_is_one_third() {
    let (g, cat) = six_node_example();
    let v = featurize_subgraph(&g, &cat);
    let c021 = TriadType::T021C.selected_index().unwrap();
    assert_eq!(v.ratio(1, c021), 1.0 / 3.0);
    assert_eq!(v.presence, vec![1, 1]);
}

#[test]
fn feature_dimension_is_seven_per_catalog_entry() {
    let big = SensitiveApiCatalog::new((0..426).map(|i| format!("api.Generated{i}.call"))).unwrap();
    let g = graph_from(3, &[(0, 1), (1, 2)]);
    assert_eq!(featurize_subgraph(&g, &big).dimension(), 2982);
    assert_eq!(feature_names(426).len(), 2982);
    assert_eq!(
        featurize_subgraph(&g, &SensitiveApiCatalog::desk()).to_dense().len(),
        70
    );
}
