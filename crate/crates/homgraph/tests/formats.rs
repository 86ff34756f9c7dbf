use homgraph::features_csv::{read_features, write_features, FeatureRecord};
use homgraph::wire::{parse_graph, serialize_graph};
use homgraph_core::{CallGraph, FunctionNode, Label};
use proptest::prelude::*;

fn arb_graph() -> impl Strategy<Value = CallGraph> {
    (1u64..20, "[a-zA-Z.$_ ]{0,12}", proptest::option::of(any::<bool>())).prop_flat_map(
        |(n, app_id, label)| {
            let nodes = proptest::collection::vec(("[a-zA-Z0-9.()\\[;/\"é]{0,20}", any::<bool>()), n as usize);
            let edges = proptest::collection::vec((0..n, 0..n), 0..40);
            (nodes, edges).prop_map(move |(nodes, edges)| {
                let label = label.map(|m| if m { Label::Malware } else { Label::Benign });
                let nodes = nodes
                    .into_iter()
                    .enumerate()
                    .map(|(i, (name, s))| FunctionNode::new(i as u64 * 3, name, s))
                    .collect();
                let edges = edges.into_iter().map(|(a, b)| ((a * 3).into(), (b * 3).into())).collect();
                CallGraph::new(app_id.clone(), label, nodes, edges).unwrap()
            })
        },
    )
}

proptest! {
    #[test]
    fn wire_round_trip(g in arb_graph()) {
        let text = serialize_graph(&g);
        let back = parse_graph(text.as_bytes()).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(serialize_graph(&back), text);
    }

    #[test]
    fn features_round_trip(
        rows in proptest::collection::vec(
            ("[a-z0-9,\" -]{1,10}", proptest::option::of(any::<bool>()), proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 14)),
            0..10,
        )
    ) {
        let records: Vec<FeatureRecord> = rows
            .into_iter()
            .map(|(app_id, label, vector)| FeatureRecord {
                app_id,
                label: label.map(|m| if m { Label::Malware } else { Label::Benign }),
                vector,
            })
            .collect();
        let bytes = write_features(&records, 2).unwrap();
        prop_assert_eq!(read_features(&bytes).unwrap(), records);
    }
}
