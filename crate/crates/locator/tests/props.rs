//! Property tests over randomly generated instances.

use locator::engine::{expand, refine};
use locator::enumerate::{canonical_key, connected_iso_classes};
use locator::matching::greedy_maximal_matching;
use locator::subdivision::SubdividedGraph;
use locator::{Graph, VertexSet};
use proptest::prelude::*;

/// A connected graph built from a random tree plus extra edge picks.
fn arb_connected(max_n: u32) -> impl Strategy<Value = Graph> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let tree = proptest::collection::vec(0..u32::MAX, (n - 1) as usize);
            let extra = proptest::collection::vec((0..n, 0..n), 0..=4);
            (Just(n), tree, extra)
        })
        .prop_map(|(n, tree, extra)| {
            let mut edges: Vec<(u32, u32)> = tree
                .iter()
                .enumerate()
                .map(|(i, r)| ((r % (i as u32 + 1)), i as u32 + 1))
                .collect();
            for (a, b) in extra {
                if a != b && !edges.contains(&(a.min(b), a.max(b))) {
                    edges.push((a.min(b), a.max(b)));
                }
            }
            Graph::new(n, &edges).unwrap()
        })
}

proptest! {
    #[test]
    fn greedy_matchings_are_maximal(g in arb_connected(8), order in proptest::collection::vec((0u32..8, 0u32..8), 0..6)) {
        let m = greedy_maximal_matching(&g, &order);
        prop_assert!(m.is_maximal(&g));
        let x = m.unmatched();
        for &u in &x {
            for &v in &x {
                prop_assert!(u == v || !g.has_edge(u, v), "unmatched set must be independent");
            }
        }
    }

    #[test]
    fn expansion_grows_and_refinement_shrinks(
        g in arb_connected(5),
        lens in proptest::collection::vec(1u32..6, 10),
        picks in proptest::collection::vec(any::<bool>(), 40),
        truth_pick in any::<u32>(),
        probe_pick in any::<u32>(),
    ) {
        let lengths: Vec<u32> = (0..g.edge_count()).map(|i| lens[i % lens.len()]).collect();
        let s = SubdividedGraph::new(g, lengths).unwrap();
        let nv = s.vertex_count();
        let mut b = VertexSet::empty(nv);
        for v in 0..nv {
            if picks[(v as usize) % picks.len()] {
                b.insert(v);
            }
        }
        let truth = truth_pick % nv;
        b.insert(truth);
        let e = expand(&s, &b);
        prop_assert!(b.is_subset_of(&e));
        let probe = probe_pick % nv;
        let r = refine(&s, &e, probe, s.distance(probe, truth)).unwrap();
        prop_assert!(r.is_subset_of(&e));
        prop_assert!(r.contains(truth));
    }

    #[test]
    fn canonical_keys_are_permutation_invariant(g in arb_connected(7), seed in any::<u64>()) {
        let n = g.vertex_count();
        let mut perm: Vec<u32> = (0..n).collect();
        // Fisher-Yates driven by the seed.
        let mut state = seed | 1;
        for i in (1..n as usize).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            perm.swap(i, j);
        }
        let h = g.relabel(&perm);
        prop_assert_eq!(canonical_key(&g), canonical_key(&h));
    }

    #[test]
    fn subdivision_vertex_ids_roundtrip(g in arb_connected(6), lens in proptest::collection::vec(1u32..9, 16)) {
        let lengths: Vec<u32> = (0..g.edge_count()).map(|i| lens[i % lens.len()]).collect();
        let s = SubdividedGraph::new(g, lengths).unwrap();
        for id in 0..s.vertex_count() {
            prop_assert_eq!(s.id(s.vertex(id)), id);
        }
        // Textual names round-trip too.
        for id in 0..s.vertex_count() {
            prop_assert_eq!(s.parse_vertex(&s.vertex_name(id)).unwrap(), id);
        }
    }
}

#[test]
fn iso_classes_have_distinct_keys() {
    for n in 1..=6 {
        let classes = connected_iso_classes(n).unwrap();
        let mut keys: Vec<_> = classes.iter().map(canonical_key).collect();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), classes.len());
    }
}
