//! Randomized soundness checks of the game engine: the true robber
//! position never leaves the tracked belief, refinement only narrows, and
//! traces are deterministic.

use locator::engine::{expand, play, refine, Outcome, RobberPolicy, SeededRandomProbe};
use locator::subdivision::SubdividedGraph;
use locator::{Graph, VertexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn random_connected(rng: &mut ChaCha8Rng, n: u32, extra: u32) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b && !edges.contains(&(a.min(b), a.max(b))) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    Graph::new(n, &edges).unwrap()
}

/// 10^4 random plays; `play` itself verifies the membership invariant
/// every round and errors out on a violation.
#[test]
fn belief_always_contains_the_robber() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut plays = 0u32;
    while plays < 10_000 {
        let n = rng.gen_range(2..=6);
        let extra = rng.gen_range(0..=3);
        let g = random_connected(&mut rng, n, extra);
        let lengths: Vec<u32> = (0..g.edge_count()).map(|_| rng.gen_range(1..=4)).collect();
        let s = Arc::new(SubdividedGraph::new(g, lengths).unwrap());
        for _ in 0..20 {
            let mut strat = SeededRandomProbe::new(s.clone(), rng.gen());
            let robber = RobberPolicy::Random { seed: rng.gen() };
            let trace = play(&s, &mut strat, robber, 30).expect("soundness invariant");
            match trace.outcome {
                Outcome::Captured { .. } | Outcome::Evaded { .. } => {}
                Outcome::StrategyError { description } => {
                    panic!("random probe strategy cannot fail: {description}")
                }
            }
            plays += 1;
        }
    }
}

#[test]
fn refinement_is_monotone_and_keeps_the_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.gen_range(2..=5);
        let g = random_connected(&mut rng, n, 2);
        let lengths: Vec<u32> = (0..g.edge_count()).map(|_| rng.gen_range(1..=5)).collect();
        let s = SubdividedGraph::new(g, lengths).unwrap();
        let nv = s.vertex_count();
        // A random nonempty belief and a consistent "true" position.
        let mut b = VertexSet::empty(nv);
        for v in 0..nv {
            if rng.gen_bool(0.4) {
                b.insert(v);
            }
        }
        let truth = rng.gen_range(0..nv);
        b.insert(truth);
        let expanded = expand(&s, &b);
        assert!(b.is_subset_of(&expanded));
        let probe = rng.gen_range(0..nv);
        let refined = refine(&s, &expanded, probe, s.distance(probe, truth)).unwrap();
        assert!(refined.is_subset_of(&expanded));
        assert!(refined.contains(truth));
    }
}

#[test]
fn identical_inputs_give_identical_traces() {
    let s = Arc::new(SubdividedGraph::equal(Graph::paw(), 3).unwrap());
    let mut outs = Vec::new();
    for _ in 0..3 {
        let mut strat = SeededRandomProbe::new(s.clone(), 42);
        let trace = play(&s, &mut strat, RobberPolicy::Random { seed: 1 }, 60).unwrap();
        outs.push(trace.to_jsonl(&s));
    }
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[1], outs[2]);
}
