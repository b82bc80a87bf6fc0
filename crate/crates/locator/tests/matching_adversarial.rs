//! Exhaustive adversarial checks of the matching strategy on the smallest
//! graphs. The acceptance suite covers every connected graph on up to five
//! vertices; this file keeps a fast subset that runs on every `cargo test`.

use locator::enumerate::connected_iso_classes;
use locator::matching::min_maximal_matching;
use locator::strategy::matching::build_matching_strategy;
use locator::subdivision::SubdividedGraph;
use locator::verify::{adversarial_verify, Verdict, VerifyConfig};
use locator::Graph;
use std::sync::Arc;

fn verify_graph(g: Graph, m: u32) -> Verdict {
    let matching = min_maximal_matching(&g);
    let s = Arc::new(SubdividedGraph::equal(g, m).unwrap());
    let strat = build_matching_strategy(s.clone(), &matching).unwrap();
    adversarial_verify(&s, &strat, &VerifyConfig::default()).unwrap()
}

#[test]
fn all_graphs_up_to_four_vertices_m12() {
    for n in 1..=4 {
        for g in connected_iso_classes(n).unwrap() {
            let edges = g.edges().to_vec();
            let verdict = verify_graph(g, 12);
            match verdict {
                Verdict::AllCaptured {
                    max_rounds,
                    max_probes_per_reduction,
                    max_reductions,
                    ..
                } => {
                    assert!(
                        max_probes_per_reduction <= n + 2,
                        "n={n} edges={edges:?}: {max_probes_per_reduction} probes in a reduction"
                    );
                    assert!(
                        max_reductions <= n.saturating_sub(1),
                        "n={n} edges={edges:?}: {max_reductions} reductions"
                    );
                    assert!(max_rounds > 0 || n == 1);
                }
                Verdict::EvasionFound { witness, .. } => panic!(
                    "evasion on n={n} edges={edges:?}: {} rounds recorded",
                    witness.rounds.len()
                ),
                Verdict::StrategyErrorFound { description, .. } => {
                    panic!("strategy error on n={n} edges={edges:?}: {description}")
                }
            }
        }
    }
}

#[test]
fn paw_and_cycle_at_m13() {
    for g in [Graph::paw(), Graph::cycle(4), Graph::complete(4)] {
        let edges = g.edges().to_vec();
        match verify_graph(g, 13) {
            Verdict::AllCaptured { .. } => {}
            Verdict::EvasionFound { .. } => panic!("evasion on {edges:?} at m=13"),
            Verdict::StrategyErrorFound { description, .. } => {
                panic!("strategy error on {edges:?} at m=13: {description}")
            }
        }
    }
}
