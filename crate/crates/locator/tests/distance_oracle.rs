//! The implicit distance oracle against breadth-first search on the
//! explicitly expanded graph: exact equality on all pairs.

use locator::subdivision::SubdividedGraph;
use locator::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

/// Explicit adjacency of the subdivided graph, by dense vertex id.
fn explicit_adjacency(s: &SubdividedGraph) -> Vec<Vec<u32>> {
    (0..s.vertex_count())
        .map(|v| s.neighbors(v).to_vec())
        .collect()
}

/// All distances from `src` by BFS over the explicit adjacency.
fn bfs(adj: &[Vec<u32>], src: u32) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    let mut q = VecDeque::new();
    dist[src as usize] = 0;
    q.push_back(src);
    while let Some(v) = q.pop_front() {
        for &w in &adj[v as usize] {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dist[v as usize] + 1;
                q.push_back(w);
            }
        }
    }
    dist
}

/// A random connected graph on `n` vertices: a random tree plus extra edges.
fn random_connected(rng: &mut ChaCha8Rng, n: u32, extra: u32) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        edges.push((parent, v));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b && !edges.contains(&(a.min(b), a.max(b))) && !edges.contains(&(a, b)) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    Graph::new(n, &edges).unwrap()
}

#[test]
fn oracle_matches_bfs_on_fifty_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for trial in 0..50 {
        // Keep the expansion at or below 200 vertices.
        let n = rng.gen_range(3..=6);
        let extra = rng.gen_range(0..=3);
        let g = random_connected(&mut rng, n, extra);
        let budget = 200u32.saturating_sub(n);
        let per_edge_max = (budget / g.edge_count() as u32).clamp(1, 20);
        let lengths: Vec<u32> = (0..g.edge_count())
            .map(|_| rng.gen_range(1..=per_edge_max))
            .collect();
        let s = SubdividedGraph::new(g, lengths).unwrap();
        assert!(s.vertex_count() <= 200, "trial {trial}");
        let adj = explicit_adjacency(&s);
        for src in 0..s.vertex_count() {
            let by_bfs = bfs(&adj, src);
            let by_oracle = s.dist_row(src);
            assert_eq!(by_bfs, by_oracle, "trial {trial}, source {src}");
        }
    }
}

#[test]
fn distance_is_a_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let g = random_connected(&mut rng, 5, 2);
        let lengths: Vec<u32> = (0..g.edge_count()).map(|_| rng.gen_range(1..=9)).collect();
        let s = SubdividedGraph::new(g, lengths).unwrap();
        let nv = s.vertex_count();
        let rows: Vec<Vec<u32>> = (0..nv).map(|v| s.dist_row(v)).collect();
        for x in 0..nv {
            assert_eq!(rows[x as usize][x as usize], 0);
            for y in 0..nv {
                assert_eq!(rows[x as usize][y as usize], rows[y as usize][x as usize]);
                assert!((rows[x as usize][y as usize] == 0) == (x == y));
                for z in 0..nv {
                    assert!(
                        rows[x as usize][z as usize]
                            <= rows[x as usize][y as usize] + rows[y as usize][z as usize]
                    );
                }
            }
        }
    }
}

#[test]
fn branch_probe_residues_classify_offsets() {
    // For equal subdivisions, the distance from any branch vertex to a
    // point at offset r from its nearest branch vertex is r or m - r
    // modulo m, and divisible by m exactly at branch vertices.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for m in [3u32, 5, 12, 13] {
        let g = random_connected(&mut rng, 5, 2);
        let s = SubdividedGraph::equal(g, m).unwrap();
        for b in 0..s.branch_count() {
            let row = s.dist_row(b);
            for v in 0..s.vertex_count() {
                let r = s.nearest_branch_dist(v);
                let residue = row[v as usize] % m;
                assert!(
                    residue == r % m || residue == (m - r % m) % m,
                    "m={m} b={b} v={v}"
                );
                assert_eq!(residue == 0, r == 0, "m={m} b={b} v={v}");
            }
        }
    }
}
