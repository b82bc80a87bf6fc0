//! Golden trace replay: identical inputs must reproduce the committed
//! traces byte for byte.

use locator::engine::{play, RobberPolicy};
use locator::matching::min_maximal_matching;
use locator::strategy::matching::build_matching_strategy;
use locator::subdivision::SubdividedGraph;
use locator::Graph;
use std::sync::Arc;

#[test]
fn k4_thread_walk_matches_golden() {
    let g = Graph::complete(4);
    let matching = min_maximal_matching(&g);
    let s = Arc::new(SubdividedGraph::equal(g, 12).unwrap());
    let mut strat = build_matching_strategy(s.clone(), &matching).unwrap();
    let start = s.thread_vertex(2, 3, 6).unwrap();
    let moves: Vec<u32> = vec![
        s.thread_vertex(2, 3, 7).unwrap(),
        s.thread_vertex(2, 3, 8).unwrap(),
        s.thread_vertex(2, 3, 7).unwrap(),
        s.thread_vertex(2, 3, 6).unwrap(),
        s.thread_vertex(2, 3, 5).unwrap(),
    ];
    let trace = play(&s, &mut strat, RobberPolicy::Scripted { start, moves }, 100).unwrap();
    let expected = include_str!("fixtures/k4_m12_thread_walk.jsonl");
    assert_eq!(trace.to_jsonl_tagged(&s), expected);
}

#[test]
fn paw_seeded_robber_matches_golden() {
    let g = Graph::paw();
    let matching = min_maximal_matching(&g);
    let s = Arc::new(SubdividedGraph::equal(g, 13).unwrap());
    let mut strat = build_matching_strategy(s.clone(), &matching).unwrap();
    let trace = play(&s, &mut strat, RobberPolicy::Random { seed: 7 }, 200).unwrap();
    let expected = include_str!("fixtures/paw_m13_random7.jsonl");
    assert_eq!(trace.to_jsonl(&s), expected);
}
