//! Matchings: greedy maximal matchings and exact minimum maximal matchings.

use crate::graph::Graph;

/// A matching of a graph on `n` vertices: pairwise vertex-disjoint edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    n: u32,
    edges: Vec<(u32, u32)>,
}

impl Matching {
    /// Builds a matching after checking edge disjointness and membership.
    pub fn new(g: &Graph, edges: &[(u32, u32)]) -> Result<Matching, String> {
        let mut canon: Vec<(u32, u32)> = edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        canon.sort_unstable();
        canon.dedup();
        let mut used = vec![false; g.vertex_count() as usize];
        for &(u, v) in &canon {
            if !g.has_edge(u, v) {
                return Err(format!("edge {u}-{v} is not in the graph"));
            }
            if used[u as usize] || used[v as usize] {
                return Err(format!("edge {u}-{v} shares a vertex with another edge"));
            }
            used[u as usize] = true;
            used[v as usize] = true;
        }
        Ok(Matching {
            n: g.vertex_count(),
            edges: canon,
        })
    }

    /// Number of edges, the quantity `k`.
    pub fn size(&self) -> u32 {
        self.edges.len() as u32
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Vertices covered by the matching.
    pub fn covered(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        v.sort_unstable();
        v
    }

    pub fn covers(&self, v: u32) -> bool {
        self.edges.iter().any(|&(a, b)| a == v || b == v)
    }

    /// The unmatched vertex set `X`, sorted.
    pub fn unmatched(&self) -> Vec<u32> {
        let mut used = vec![false; self.n as usize];
        for &(a, b) in &self.edges {
            used[a as usize] = true;
            used[b as usize] = true;
        }
        (0..self.n).filter(|&v| !used[v as usize]).collect()
    }

    /// Partner of a matched vertex.
    pub fn partner(&self, v: u32) -> Option<u32> {
        self.edges.iter().find_map(|&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }

    /// A matching is maximal iff the unmatched vertices form an independent set.
    pub fn is_maximal(&self, g: &Graph) -> bool {
        self.first_extendable_edge(g).is_none()
    }

    /// An edge between two unmatched vertices, if any (witness of non-maximality).
    pub fn first_extendable_edge(&self, g: &Graph) -> Option<(u32, u32)> {
        let x = self.unmatched();
        for &u in &x {
            for &w in g.neighbors(u) {
                if w > u && x.binary_search(&w).is_ok() {
                    return Some((u, w));
                }
            }
        }
        None
    }
}

/// Greedily builds a maximal matching, considering `priority` edges first and
/// then the remaining edges in canonical order. The result is always maximal.
pub fn greedy_maximal_matching(g: &Graph, priority: &[(u32, u32)]) -> Matching {
    let mut used = vec![false; g.vertex_count() as usize];
    let mut picked = Vec::new();
    let try_edge = |e: (u32, u32), used: &mut Vec<bool>, picked: &mut Vec<(u32, u32)>| {
        let (u, v) = (e.0.min(e.1), e.0.max(e.1));
        if g.has_edge(u, v) && !used[u as usize] && !used[v as usize] {
            used[u as usize] = true;
            used[v as usize] = true;
            picked.push((u, v));
        }
    };
    for &e in priority {
        try_edge(e, &mut used, &mut picked);
    }
    for &e in g.edges() {
        try_edge(e, &mut used, &mut picked);
    }
    Matching::new(g, &picked).expect("greedy picks disjoint graph edges")
}

/// Exact minimum maximal matching by exhaustive branching.
///
/// Processes vertices in increasing order; the lowest undecided vertex is
/// either matched to an undecided neighbour or declared permanently
/// unmatched (legal only while the unmatched set stays independent). Every
/// maximal matching is reachable this way. Prunes on the incumbent size.
/// Intended for small graphs; the problem is NP-hard in general.
pub fn min_maximal_matching(g: &Graph) -> Matching {
    let n = g.vertex_count() as usize;
    let seed = greedy_maximal_matching(g, &[]);
    let mut best_size = seed.size();
    let mut best: Vec<(u32, u32)> = seed.edges().to_vec();
    let mut matched = vec![false; n];
    let mut declined = vec![false; n];
    let mut current: Vec<(u32, u32)> = Vec::new();

    fn search(
        g: &Graph,
        matched: &mut Vec<bool>,
        declined: &mut Vec<bool>,
        current: &mut Vec<(u32, u32)>,
        best_size: &mut u32,
        best: &mut Vec<(u32, u32)>,
    ) {
        if current.len() as u32 >= *best_size {
            return;
        }
        let next = (0..g.vertex_count()).find(|&v| !matched[v as usize] && !declined[v as usize]);
        let u = match next {
            Some(u) => u,
            None => {
                // All vertices decided and the declined set is independent by
                // construction, so the current matching is maximal.
                if (current.len() as u32) < *best_size {
                    *best_size = current.len() as u32;
                    *best = current.clone();
                }
                return;
            }
        };
        // Option 1: leave u unmatched, if no declined neighbour exists.
        if g.neighbors(u).iter().all(|&w| !declined[w as usize]) {
            declined[u as usize] = true;
            search(g, matched, declined, current, best_size, best);
            declined[u as usize] = false;
        }
        // Option 2: match u with an undecided neighbour.
        for &v in g.neighbors(u) {
            if !matched[v as usize] && !declined[v as usize] {
                matched[u as usize] = true;
                matched[v as usize] = true;
                current.push((u.min(v), u.max(v)));
                search(g, matched, declined, current, best_size, best);
                current.pop();
                matched[u as usize] = false;
                matched[v as usize] = false;
            }
        }
    }

    search(
        g,
        &mut matched,
        &mut declined,
        &mut current,
        &mut best_size,
        &mut best,
    );
    Matching::new(g, &best).expect("search yields a valid matching")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimum maximal matching size by brute force over all edge subsets.
    /// Independent of the branch-and-bound path; only usable on small graphs.
    fn mmm_by_subsets(g: &Graph) -> u32 {
        let m = g.edge_count();
        assert!(m <= 22, "subset oracle limited to 22 edges");
        let mut best = u32::MAX;
        'mask: for mask in 0u32..(1 << m) {
            let mut used = vec![false; g.vertex_count() as usize];
            let mut size = 0;
            for (i, &(u, v)) in g.edges().iter().enumerate() {
                if mask & (1 << i) != 0 {
                    if used[u as usize] || used[v as usize] {
                        continue 'mask;
                    }
                    used[u as usize] = true;
                    used[v as usize] = true;
                    size += 1;
                }
            }
            let maximal = g
                .edges()
                .iter()
                .all(|&(u, v)| used[u as usize] || used[v as usize]);
            if maximal && size < best {
                best = size;
            }
        }
        best
    }

    #[test]
    fn greedy_middle_edge_of_p4() {
        let g = Graph::path(4);
        let m = greedy_maximal_matching(&g, &[(1, 2)]);
        assert_eq!(m.size(), 1);
        assert_eq!(m.edges(), &[(1, 2)]);
        assert!(m.is_maximal(&g));
    }

    #[test]
    fn greedy_k2() {
        let g = Graph::complete(2);
        assert_eq!(greedy_maximal_matching(&g, &[]).size(), 1);
    }

    #[test]
    fn greedy_c6_order() {
        let g = Graph::cycle(6);
        let m = greedy_maximal_matching(&g, &[(0, 1), (3, 4)]);
        assert_eq!(m.size(), 2);
        assert_eq!(m.unmatched(), vec![2, 5]);
        assert!(!g.has_edge(2, 5), "unmatched set must be independent");
        assert!(m.is_maximal(&g));
    }

    #[test]
    fn min_maximal_examples() {
        assert_eq!(min_maximal_matching(&Graph::path(4)).size(), 1);
        assert_eq!(min_maximal_matching(&Graph::complete(4)).size(), 2);
        assert_eq!(min_maximal_matching(&Graph::cycle(6)).size(), 2);
        assert_eq!(mmm_by_subsets(&Graph::cycle(6)), 2);
    }

    #[test]
    fn min_maximal_matches_subset_oracle() {
        let graphs = [
            Graph::path(7),
            Graph::cycle(7),
            Graph::complete(5),
            Graph::complete(6),
            Graph::complete_bipartite(3, 3),
            Graph::star(6),
            Graph::paw(),
            Graph::new(8, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (0, 7), (1, 5)])
                .unwrap(),
        ];
        for g in &graphs {
            let m = min_maximal_matching(g);
            assert!(m.is_maximal(g));
            assert_eq!(m.size(), mmm_by_subsets(g), "graph {:?}", g.edges());
        }
    }

    #[test]
    fn maximality_witness() {
        let g = Graph::path(4);
        let m = Matching::new(&g, &[(0, 1)]).unwrap();
        assert!(!m.is_maximal(&g));
        assert_eq!(m.first_extendable_edge(&g), Some((2, 3)));
    }
}
