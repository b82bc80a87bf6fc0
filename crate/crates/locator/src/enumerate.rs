//! Small-graph enumeration with canonical-form deduplication, and the
//! machine check that minimum maximal matchings of size n/2 pin down the
//! graph.
//!
//! Canonical forms are computed by brute-force minimization of the
//! adjacency bit string over vertex orderings, restricted to orderings
//! that sort degrees descending (isomorphisms preserve degrees, so the
//! minimum over this subgroup is still an isomorphism invariant). Bits are
//! laid out column by column so the search can prune on prefixes. This is
//! deliberately dependency-free; instances stay at desk scale.

use crate::error::EnumError;
use crate::graph::Graph;
use crate::matching::min_maximal_matching;
use std::collections::HashSet;

/// Most vertices supported by the enumeration routines.
pub const MAX_ENUM_VERTICES: u32 = 8;

/// Canonical form of a graph: the minimal adjacency bit string described in
/// the module docs, paired with the vertex count. Equal keys mean
/// isomorphic graphs (for graphs within the supported size).
pub fn canonical_key(g: &Graph) -> (u32, u64) {
    let n = g.vertex_count() as usize;
    assert!(n <= 10, "canonical forms support at most 10 vertices");
    if n <= 1 {
        return (n as u32, 0);
    }
    let adj: Vec<u16> = (0..n)
        .map(|v| {
            let mut row = 0u16;
            for &w in g.neighbors(v as u32) {
                row |= 1 << w;
            }
            row
        })
        .collect();

    // Degree classes, descending; positions are filled class block by class
    // block so every explored ordering sorts degrees descending.
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    let mut classes: Vec<Vec<u32>> = Vec::new();
    for v in order {
        match classes.last_mut() {
            Some(c) if g.degree(c[0]) == g.degree(v) => c.push(v),
            _ => classes.push(vec![v]),
        }
    }

    let total_bits = n * (n - 1) / 2;
    let mut best: Option<u64> = None;

    // perm[i] = original vertex at position i.
    fn rec(
        adj: &[u16],
        classes: &[Vec<u32>],
        class_idx: usize,
        used_in_class: u16,
        perm: &mut Vec<u32>,
        bits: u64,
        nbits: u32,
        total_bits: usize,
        best: &mut Option<u64>,
    ) {
        let n = adj.len();
        if perm.len() == n {
            let v = bits << (total_bits as u32 - nbits);
            debug_assert_eq!(nbits as usize, total_bits);
            if best.map_or(true, |b| v < b) {
                *best = Some(v);
            }
            return;
        }
        let (class_idx, used_in_class) = if classes[class_idx].len()
            == used_in_class.count_ones() as usize
        {
            (class_idx + 1, 0)
        } else {
            (class_idx, used_in_class)
        };
        for (i, &v) in classes[class_idx].iter().enumerate() {
            if used_in_class & (1 << i) != 0 {
                continue;
            }
            // Column bits of the new position against all earlier positions.
            let j = perm.len();
            let mut col = 0u64;
            for (p, &w) in perm.iter().enumerate() {
                if adj[v as usize] & (1 << w) != 0 {
                    col |= 1 << (j - 1 - p);
                }
            }
            let nb = nbits + j as u32;
            let prefix = (bits << j) | col;
            if let Some(b) = *best {
                // Compare against the best key's prefix of the same length.
                if nb > 0 && (prefix > (b >> (total_bits as u32 - nb))) {
                    continue;
                }
            }
            perm.push(v);
            rec(
                adj,
                classes,
                class_idx,
                used_in_class | (1 << i),
                perm,
                prefix,
                nb,
                total_bits,
                best,
            );
            perm.pop();
        }
    }

    let mut perm = Vec::with_capacity(n);
    rec(
        &adj,
        &classes,
        0,
        0,
        &mut perm,
        0,
        0,
        total_bits,
        &mut best,
    );
    (n as u32, best.unwrap())
}

/// Rebuilds the canonical representative graph from a key.
pub fn graph_from_key(n: u32, key: u64) -> Graph {
    let mut edges = Vec::new();
    let mut bit = (n as u64) * (n as u64 - 1) / 2;
    for j in 1..n {
        for i in 0..j {
            bit -= 1;
            if key & (1u64 << bit) != 0 {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, &edges).unwrap()
}

pub fn isomorphic(a: &Graph, b: &Graph) -> bool {
    a.vertex_count() == b.vertex_count() && canonical_key(a) == canonical_key(b)
}

/// All connected graphs on `v` labeled vertices, lazily.
pub fn labeled_connected_graphs(v: u32) -> Result<impl Iterator<Item = Graph>, EnumError> {
    if v > MAX_ENUM_VERTICES {
        return Err(EnumError::TooManyVertices {
            requested: v,
            limit: MAX_ENUM_VERTICES,
        });
    }
    let pairs: Vec<(u32, u32)> = (0..v)
        .flat_map(|a| ((a + 1)..v).map(move |b| (a, b)))
        .collect();
    let nmasks: u64 = 1u64 << pairs.len();
    Ok((0..nmasks).filter_map(move |mask| {
        let edges: Vec<(u32, u32)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1u64 << i) != 0)
            .map(|(_, &e)| e)
            .collect();
        let g = Graph::new(v, &edges).unwrap();
        g.is_connected().then_some(g)
    }))
}

/// One representative per isomorphism class of connected graphs on `v`
/// vertices, built by vertex augmentation (every connected graph has a
/// non-cut vertex, so removing it leaves a connected graph one size down).
pub fn connected_iso_classes(v: u32) -> Result<Vec<Graph>, EnumError> {
    if v > MAX_ENUM_VERTICES {
        return Err(EnumError::TooManyVertices {
            requested: v,
            limit: MAX_ENUM_VERTICES,
        });
    }
    if v == 0 {
        return Ok(Vec::new());
    }
    let mut current: Vec<Graph> = vec![Graph::new(1, &[]).unwrap()];
    for size in 2..=v {
        let mut seen: HashSet<(u32, u64)> = HashSet::new();
        let mut next: Vec<(u64, Graph)> = Vec::new();
        for parent in &current {
            let base = size - 1;
            for subset in 1u32..(1 << base) {
                let mut edges: Vec<(u32, u32)> = parent.edges().to_vec();
                for b in 0..base {
                    if subset & (1 << b) != 0 {
                        edges.push((b, base));
                    }
                }
                let g = Graph::new(size, &edges).unwrap();
                let key = canonical_key(&g);
                if seen.insert(key) {
                    next.push((key.1, graph_from_key(size, key.1)));
                }
            }
        }
        next.sort_by_key(|(k, _)| *k);
        current = next.into_iter().map(|(_, g)| g).collect();
    }
    Ok(current)
}

/// An extremal graph found by [`check_mmm_lemma`].
#[derive(Debug, Clone)]
pub struct ExtremalGraph {
    pub graph: Graph,
    /// Canonical adjacency matrix, one '0'/'1' string per row.
    pub adjacency_rows: Vec<String>,
    /// "K_n" or "K_{r,r}" when recognized.
    pub name: Option<String>,
}

/// Report of the structural check on minimum maximal matchings.
#[derive(Debug, Clone)]
pub struct MmmLemmaReport {
    pub r: u32,
    pub classes_checked: usize,
    pub extremal: Vec<ExtremalGraph>,
    /// True iff the extremal set is exactly the complete graph and the
    /// balanced complete bipartite graph on 2r vertices.
    pub holds: bool,
}

fn adjacency_rows(g: &Graph) -> Vec<String> {
    let n = g.vertex_count();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if g.has_edge(i, j) { '1' } else { '0' })
                .collect()
        })
        .collect()
}

/// Enumerates all connected graphs on `2r` vertices (up to isomorphism),
/// computes the minimum maximal matching size of each, and reports which
/// graphs attain the value `r`.
pub fn check_mmm_lemma(r: u32) -> Result<MmmLemmaReport, EnumError> {
    let classes = connected_iso_classes(2 * r)?;
    let classes_checked = classes.len();
    let complete = canonical_key(&Graph::complete(2 * r));
    let bipartite = canonical_key(&Graph::complete_bipartite(r, r));
    let mut extremal = Vec::new();
    let mut keys = Vec::new();
    for g in classes {
        if min_maximal_matching(&g).size() == r {
            let key = canonical_key(&g);
            let name = if key == complete {
                Some(format!("K_{}", 2 * r))
            } else if key == bipartite {
                Some(format!("K_{{{r},{r}}}"))
            } else {
                None
            };
            extremal.push(ExtremalGraph {
                adjacency_rows: adjacency_rows(&g),
                graph: g,
                name,
            });
            keys.push(key);
        }
    }
    keys.sort_unstable();
    keys.dedup();
    let mut expected = vec![complete, bipartite];
    expected.sort_unstable();
    expected.dedup();
    let holds = keys == expected;
    Ok(MmmLemmaReport {
        r,
        classes_checked,
        extremal,
        holds,
    })
}
